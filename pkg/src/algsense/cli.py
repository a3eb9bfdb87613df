"""Command-line front end.

Subcommands: identify, fiber, curve {intersect|inflections|scan|figure},
cur, audit.  Exit codes: 0 success, 2 configuration error, 3 dimension
mismatch, 4 numerical failure.  Reports are JSON (with the resolved
configuration embedded), tabular outputs CSV.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import (
    curve_from_spec,
    experiment_from_spec,
    family_from_spec,
    load_config,
    resolved_config,
    variety_from_spec,
)
from .curves import (
    AffineLine,
    figure_data,
    inflection_points,
    line_intersect,
    random_real_curve_point,
    single_measurement_scan,
)
from .engine import audit_family, cur_reconstruct, run_trials, trial_rng, trial_rows_csv
from .errors import ConfigError, DimensionMismatchError, NumericalError
from .fiber import enumerate_fiber
from .measurements import measure_all
from .varieties import random_point

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIMENSION = 3
EXIT_NUMERICAL = 4


def _dump_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_floats(text: str, expected: int, what: str):
    parts = text.split(",")
    if len(parts) != expected:
        raise ConfigError(f"{what} needs {expected} comma-separated numbers")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from exc


def _parse_ints(text: str, what: str):
    try:
        return [int(p) for p in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from exc


def cmd_identify(args) -> int:
    doc = load_config(args.config)
    config = experiment_from_spec(doc, seed_override=args.seed,
                                  trials_override=args.trials)
    report = run_trials(config)
    report["config"] = resolved_config(config, doc)
    out = _out_dir(args)
    report_path = out / doc.get("report_path", "identify_report.json")
    _dump_json(report_path, report)
    (out / "identify_trials.csv").write_text(trial_rows_csv(report))
    for m, stats in report["per_count"].items():
        print(f"m={m}: unique recovery rate {stats['unique_recovery_rate']:.3f}, "
              f"cardinalities {stats['cardinality_hist']}")
    print(f"report written to {report_path}")
    return EXIT_OK


def cmd_fiber(args) -> int:
    doc = load_config(args.config)
    config = experiment_from_spec(doc, seed_override=args.seed)
    m = args.count or config.measurement_counts[0]
    theta, x = random_point(config.variety, trial_rng(config.master_seed, 0, 0))
    functionals = config.family.sample_many(m, trial_rng(config.master_seed, 0, 1))
    system = measure_all(x, functionals)
    fiber = enumerate_fiber(config.variety, system, config.solver,
                            target_theta=theta, target_point=x,
                            rng=trial_rng(config.master_seed, 0, 2))
    payload = {
        "kind": "fiber_report",
        "config": resolved_config(config, doc),
        "measurements": m,
        "system": system.to_jsonable(),
        "fiber": fiber.to_jsonable(),
    }
    out = _out_dir(args)
    _dump_json(out / "fiber_report.json", payload)
    print(f"fiber cardinality {fiber.cardinality} "
          f"(failed starts {fiber.failed_starts}, "
          f"contains target: {fiber.contains_target})")
    for pt, res, basin in zip(fiber.points, fiber.residuals, fiber.basin_counts):
        print(f"  point {np.array2string(pt, precision=6)} "
              f"residual {res:.2e} basin {basin}")
    return EXIT_OK


def _curve_from_args(args):
    if args.curve == "cubic":
        return curve_from_spec({"kind": "cubic", "lambda": args.lam})
    return curve_from_spec({"kind": args.curve})


def cmd_curve(args) -> int:
    curve = _curve_from_args(args)
    out = Path(args.out) if args.out else None

    if args.action == "intersect":
        if not args.line:
            raise ConfigError("curve intersect needs --line a1,a2,y")
        a1, a2, y = _parse_floats(args.line, 3, "--line")
        hit = line_intersect(curve, AffineLine((a1, a2), y))
        print(f"{curve.name} vs line ({a1:g},{a2:g})=({y:g}): "
              f"{hit.distinct_affine_count} affine points, "
              f"infinity count {hit.infinity_count}")
        for pt, mult in zip(hit.points, hit.multiplicities):
            print(f"  ({pt.x1:.10g}, {pt.x2:.10g}) multiplicity {mult}")
        if out:
            out.mkdir(parents=True, exist_ok=True)
            _dump_json(out / "curve_intersect.json", {
                "curve": curve.name, "line": [a1, a2, y], "seed": args.seed,
                "points": [[pt.x1.real, pt.x1.imag, pt.x2.real, pt.x2.imag]
                           for pt in hit.points],
                "multiplicities": hit.multiplicities,
                "infinity_count": hit.infinity_count,
            })
        return EXIT_OK

    if args.action == "inflections":
        points = inflection_points(curve)
        real = [p for p in points if p.is_real()]
        print(f"{curve.name}: {len(points)} affine inflection points, "
              f"{len(real)} real")
        for pt in points:
            tag = "real" if pt.is_real() else "complex"
            print(f"  ({pt.x1:.8g}, {pt.x2:.8g}) [{tag}]")
        if out:
            out.mkdir(parents=True, exist_ok=True)
            _dump_json(out / "curve_inflections.json", {
                "curve": curve.name, "seed": args.seed,
                "points": [[pt.x1.real, pt.x1.imag, pt.x2.real, pt.x2.imag]
                           for pt in points],
                "real_flags": [pt.is_real() for pt in points],
            })
        return EXIT_OK

    if args.action == "scan":
        if args.point:
            p = _parse_floats(args.point, 2, "--point")
        else:
            rng = np.random.default_rng(args.seed if args.seed is not None else 0)
            p = random_real_curve_point(curve, rng)
        report = single_measurement_scan(curve, p, args.directions)
        print(f"{curve.name} at ({p[0]:.6g}, {p[1]:.6g}): distinct affine counts "
              f"min {report.min_count}, max {report.max_count} "
              f"over {args.directions} directions")
        if out:
            out.mkdir(parents=True, exist_ok=True)
            lines = ["angle,distinct_count,infinity_count"]
            for a, c, i in zip(report.angles, report.distinct_counts,
                               report.infinity_counts):
                lines.append(f"{a!r},{c},{i}")
            (out / "curve_scan.csv").write_text("\n".join(lines) + "\n")
        return EXIT_OK

    if args.action == "figure":
        rows = figure_data(curve)
        outdir = out if out else Path(".")
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / "curve_figure.csv"
        lines = ["label,x1,x2"]
        lines += [f"{r['label']},{r['x1']!r},{r['x2']!r}" for r in rows]
        path.write_text("\n".join(lines) + "\n")
        labeled = sorted({r["label"] for r in rows} - {"branch"})
        print(f"wrote {path} ({len(rows)} rows; labeled points: "
              f"{', '.join(labeled)})")
        return EXIT_OK

    raise ConfigError(f"unknown curve action {args.action!r}")


def cmd_cur(args) -> int:
    path = Path(args.matrix)
    if not path.is_file():
        raise ConfigError(f"matrix file not found: {path}")
    try:
        matrix = np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))
    except ValueError as exc:
        raise ConfigError(f"could not parse {path} as CSV of reals: {exc}") from exc
    rows = _parse_ints(args.rows, "--rows")
    cols = _parse_ints(args.cols, "--cols")
    try:
        result = cur_reconstruct(matrix, rows, cols)
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad row/column selection: {exc}") from exc
    print(f"cross size {result.cross_size} "
          f"(rows {rows}, cols {cols}, pivot condition {result.pivot_condition:.3e})")
    print(f"Frobenius-relative reconstruction error {result.rel_error:.3e}")
    if args.out:
        out = _out_dir(args)
        np.savetxt(out / "cur_reconstruction.csv", result.matrix, delimiter=",")
    return EXIT_OK


def cmd_audit(args) -> int:
    doc = load_config(args.config)
    required = {"variety", "family"}
    optional = {"trials", "master_seed"}
    unknown = set(doc) - required - optional
    if unknown:
        raise ConfigError(f"audit config: unknown keys {sorted(unknown)}")
    if missing := required - set(doc):
        raise ConfigError(f"audit config: missing keys {sorted(missing)}")
    variety = variety_from_spec(doc["variety"])
    family = family_from_spec(doc["family"])
    seed = args.seed if args.seed is not None else int(doc.get("master_seed", 0))
    report = audit_family(family, variety, trials=int(doc.get("trials", 10)),
                          master_seed=seed)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"family {report.family} on {report.variety}: {verdict}")
    print(f"  nondegeneracy rank {report.nondegeneracy_rank}/{report.ambient_dim}")
    print(f"  local identifiability ok fraction {report.local_ok_fraction:.2f} "
          f"(ranks {report.local_ranks})")
    for w in report.warnings:
        print(f"  warning: {w}")
    if args.out:
        out = _out_dir(args)
        payload = report.to_jsonable()
        payload["config"] = {"variety": doc["variety"], "family": doc["family"],
                             "master_seed": seed,
                             "trials": int(doc.get("trials", 10))}
        _dump_json(out / "audit_report.json", payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="algsense",
        description="identifiability experiments for variety-constrained recovery",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identify", help="run recovery-rate trials")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("fiber", help="enumerate one measurement fiber")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_fiber)

    p = sub.add_parser("curve", help="plane-curve computations")
    p.add_argument("action", choices=["intersect", "inflections", "scan", "figure"])
    p.add_argument("--curve", choices=["cubic", "circle", "parabola"],
                   default="cubic")
    p.add_argument("--lambda", dest="lam", type=float, default=2.0)
    p.add_argument("--line", default=None, help="a1,a2,y")
    p.add_argument("--point", default=None, help="x1,x2")
    p.add_argument("--directions", type=int, default=360)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("cur", help="cross reconstruction of a low-rank matrix")
    p.add_argument("--matrix", required=True, help="CSV file of reals")
    p.add_argument("--rows", required=True, help="comma-separated row indices (0-based)")
    p.add_argument("--cols", required=True, help="comma-separated column indices (0-based)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_cur)

    p = sub.add_parser("audit", help="audit family hypotheses against a variety")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DimensionMismatchError as exc:
        print(f"dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

"""Strict kind-tagged JSON specs for varieties, families and experiments.

Unknown keys are rejected outright so misspelled experiment options fail
loudly instead of silently running with defaults.
"""

import json
from pathlib import Path

from .engine import ExperimentConfig
from .errors import ConfigError, DimensionMismatchError
from .fiber import SolverOptions
from .measurements import (
    MeasurementFamily,
    entry_family,
    evaluation_family,
    gaussian_family,
    line_family,
    rank_one_family,
    tensor_feature_family,
)
from .varieties import (
    ImplicitPlaneCurve,
    ParametricVariety,
    make_circle,
    make_cubic,
    make_low_rank,
    make_parabola,
    make_parabola_implicit,
    make_veronese_model,
)


def _check_keys(spec: dict, required: set, optional: set, context: str) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError(f"{context}: expected an object, got {type(spec).__name__}")
    keys = set(spec)
    missing = required - keys
    if missing:
        raise ConfigError(f"{context}: missing keys {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")
    return spec


def _wrap_value_errors(fn, context: str):
    try:
        return fn()
    except DimensionMismatchError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def variety_from_spec(spec: dict) -> ParametricVariety:
    kind = spec.get("kind") if isinstance(spec, dict) else None
    if kind == "low_rank":
        _check_keys(spec, {"kind", "d1", "d2", "k"}, set(), "variety(low_rank)")
        return _wrap_value_errors(
            lambda: make_low_rank(int(spec["d1"]), int(spec["d2"]), int(spec["k"])),
            "variety(low_rank)")
    if kind == "parabola":
        _check_keys(spec, {"kind"}, set(), "variety(parabola)")
        return make_parabola()
    if kind == "veronese":
        _check_keys(spec, {"kind", "d", "m"}, {"model", "support", "rank"},
                    "variety(veronese)")
        return _wrap_value_errors(
            lambda: make_veronese_model(
                int(spec["d"]), int(spec["m"]),
                model=spec.get("model", "full"),
                support=spec.get("support"),
                rank=spec.get("rank")),
            "variety(veronese)")
    raise ConfigError(f"unknown variety kind {kind!r}")


def curve_from_spec(spec: dict) -> ImplicitPlaneCurve:
    kind = spec.get("kind") if isinstance(spec, dict) else None
    if kind == "cubic":
        _check_keys(spec, {"kind", "lambda"}, set(), "curve(cubic)")
        return _wrap_value_errors(lambda: make_cubic(float(spec["lambda"])),
                                  "curve(cubic)")
    if kind == "circle":
        _check_keys(spec, {"kind"}, {"radius"}, "curve(circle)")
        return _wrap_value_errors(
            lambda: make_circle(float(spec.get("radius", 1.0))), "curve(circle)")
    if kind == "parabola":
        _check_keys(spec, {"kind"}, set(), "curve(parabola)")
        return make_parabola_implicit()
    raise ConfigError(f"unknown curve kind {kind!r}")


def family_from_spec(spec: dict) -> MeasurementFamily:
    kind = spec.get("kind") if isinstance(spec, dict) else None
    if kind == "gaussian":
        _check_keys(spec, {"kind", "ambient_dim"}, set(), "family(gaussian)")
        return _wrap_value_errors(
            lambda: gaussian_family(int(spec["ambient_dim"])), "family(gaussian)")
    if kind == "rank_one":
        _check_keys(spec, {"kind", "d1", "d2"}, {"normalize"}, "family(rank_one)")
        return _wrap_value_errors(
            lambda: rank_one_family(int(spec["d1"]), int(spec["d2"]),
                                    bool(spec.get("normalize", True))),
            "family(rank_one)")
    if kind == "entry":
        _check_keys(spec, {"kind", "d1", "d2"}, set(), "family(entry)")
        return _wrap_value_errors(
            lambda: entry_family(int(spec["d1"]), int(spec["d2"])), "family(entry)")
    if kind == "evaluation":
        _check_keys(spec, {"kind", "d", "m"}, {"lifted"}, "family(evaluation)")
        return _wrap_value_errors(
            lambda: evaluation_family(int(spec["d"]), int(spec["m"]),
                                      bool(spec.get("lifted", True))),
            "family(evaluation)")
    if kind == "tensor_feature":
        _check_keys(spec, {"kind", "bases"}, {"box"}, "family(tensor_feature)")
        return _wrap_value_errors(
            lambda: tensor_feature_family(spec["bases"],
                                          tuple(spec.get("box", (-1.0, 1.0)))),
            "family(tensor_feature)")
    if kind == "line":
        _check_keys(spec, {"kind", "direction"}, set(), "family(line)")
        return _wrap_value_errors(
            lambda: line_family(spec["direction"]), "family(line)")
    raise ConfigError(f"unknown family kind {kind!r}")


def solver_from_spec(spec: dict | None) -> SolverOptions:
    if spec is None:
        return SolverOptions()
    allowed = {"num_starts", "max_iters", "residual_tol", "cluster_tol",
               "damping_init", "start_radius"}
    _check_keys(spec, set(), allowed, "solver")
    return _wrap_value_errors(lambda: SolverOptions(**spec), "solver")


def experiment_from_spec(doc: dict, seed_override: int | None = None,
                         trials_override: int | None = None) -> ExperimentConfig:
    required = {"variety", "family", "measurement_counts"}
    optional = {"trials", "master_seed", "solver", "workers", "report_path"}
    _check_keys(doc, required, optional, "experiment")
    variety = variety_from_spec(doc["variety"])
    family = family_from_spec(doc["family"])
    solver = solver_from_spec(doc.get("solver"))
    return _wrap_value_errors(lambda: ExperimentConfig(
        variety=variety,
        family=family,
        measurement_counts=tuple(doc["measurement_counts"]),
        trials=int(trials_override if trials_override is not None
                   else doc.get("trials", 100)),
        master_seed=int(seed_override if seed_override is not None
                        else doc.get("master_seed", 0)),
        solver=solver,
        workers=int(doc.get("workers", 1)),
    ), "experiment")


def load_config(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return doc


def resolved_config(config: ExperimentConfig, doc: dict) -> dict:
    """The fully-resolved settings embedded into every report."""
    from dataclasses import asdict

    return {
        "variety": doc["variety"],
        "family": doc["family"],
        "measurement_counts": list(config.measurement_counts),
        "trials": config.trials,
        "master_seed": config.master_seed,
        "solver": asdict(config.solver),
        "workers": config.workers,
    }

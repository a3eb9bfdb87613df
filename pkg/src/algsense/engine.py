"""Experiment orchestration: identifiability trials, CUR recovery, audits.

Every randomized experiment derives one rng stream per (master seed,
trial index, purpose) triple, so reports are reproducible bit-for-bit
regardless of how trials are scheduled across workers.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DimensionMismatchError, SingularPivotError
from .fiber import FiberReport, SolverOptions, enumerate_fiber, local_identifiability
from .curves import AffineLine, line_intersect, random_real_curve_point
from .measurements import MeasurementFamily, measure_all, nondegeneracy_rank
from .varieties import ImplicitPlaneCurve, ParametricVariety, random_point

# purpose tags for per-trial rng streams
_PURPOSE_POINT = 0
_PURPOSE_FUNCTIONALS = 1
_PURPOSE_STARTS = 2


def trial_rng(master_seed: int, trial: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed), int(trial), int(purpose)]))


@dataclass(frozen=True)
class ExperimentConfig:
    variety: ParametricVariety
    family: MeasurementFamily
    measurement_counts: tuple
    trials: int = 100
    master_seed: int = 0
    solver: SolverOptions = field(default_factory=SolverOptions)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "measurement_counts",
                           tuple(int(m) for m in self.measurement_counts))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.measurement_counts or min(self.measurement_counts) < 1:
            raise ValueError("measurement counts must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.family.ambient_dim != self.variety.ambient_dim:
            raise DimensionMismatchError(
                f"family dimension {self.family.ambient_dim} does not match "
                f"variety ambient dimension {self.variety.ambient_dim}")


@dataclass
class TrialReport:
    trial: int
    seed: int
    count: int
    cardinality: int
    recovered: bool
    solver_failure: bool
    min_pairwise_distance: float
    wall_time: float
    fiber: FiberReport = field(repr=False, default=None)


def _run_single_trial(config: ExperimentConfig, trial: int):
    theta, x = random_point(config.variety,
                            trial_rng(config.master_seed, trial, _PURPOSE_POINT))
    func_rng = trial_rng(config.master_seed, trial, _PURPOSE_FUNCTIONALS)
    functionals = config.family.sample_many(max(config.measurement_counts), func_rng)
    system = measure_all(x, functionals)

    reports = []
    for m in config.measurement_counts:
        start = time.perf_counter()
        fiber = enumerate_fiber(
            config.variety, system.prefix(m), config.solver,
            target_theta=theta, target_point=x,
            rng=trial_rng(config.master_seed, trial, _PURPOSE_STARTS))
        elapsed = time.perf_counter() - start
        recovered = bool(fiber.contains_target) and fiber.cardinality == 1
        reports.append(TrialReport(
            trial=trial,
            seed=config.master_seed,
            count=m,
            cardinality=fiber.cardinality,
            recovered=recovered,
            solver_failure=not fiber.contains_target,
            min_pairwise_distance=fiber.min_pairwise_distance(),
            wall_time=elapsed,
            fiber=fiber,
        ))
    return reports


def collect_trial_reports(config: ExperimentConfig) -> list:
    """All per-trial reports (with fibers attached), ordered by trial index."""
    if config.workers == 1:
        per_trial = [_run_single_trial(config, t) for t in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            per_trial = list(pool.map(lambda t: _run_single_trial(config, t),
                                      range(config.trials)))
    return [r for reports in per_trial for r in reports]


def run_trials(config: ExperimentConfig) -> dict:
    """Identifiability experiment: per-count recovery statistics.

    For each trial a random model point is measured by a fresh batch of
    functionals drawn from the family; each requested count m uses the
    first m functionals of that batch, so recovery is monotone along the
    prefix.  Unique recovery means the fiber is the single target point.
    """
    flat = collect_trial_reports(config)
    by_count = {}
    for m in config.measurement_counts:
        rows = sorted((r for r in flat if r.count == m), key=lambda r: r.trial)
        cards = [r.cardinality for r in rows]
        hist = {}
        for c in cards:
            hist[str(c)] = hist.get(str(c), 0) + 1
        by_count[str(m)] = {
            "trials": len(rows),
            "unique_recovery_rate": sum(r.recovered for r in rows) / len(rows),
            "cardinality_hist": dict(sorted(hist.items(), key=lambda kv: int(kv[0]))),
            "solver_failures": sum(r.solver_failure for r in rows),
            "identifiability_failures": sum(
                (not r.recovered) and (not r.solver_failure) for r in rows),
        }
    return {
        "kind": "identifiability_trials",
        "variety": config.variety.name,
        "family": config.family.name,
        "master_seed": config.master_seed,
        "trials": config.trials,
        "measurement_counts": list(config.measurement_counts),
        "solver": asdict(config.solver),
        "per_count": by_count,
        "trial_rows": [
            {
                "trial": r.trial, "count": r.count, "cardinality": r.cardinality,
                "recovered": r.recovered, "solver_failure": r.solver_failure,
                "min_pairwise_distance": (
                    None if np.isinf(r.min_pairwise_distance)
                    else r.min_pairwise_distance),
            }
            for r in sorted(flat, key=lambda r: (r.trial, r.count))
        ],
    }


def trial_rows_csv(report: dict) -> str:
    """Per-trial CSV table for a run_trials report."""
    lines = ["trial,count,cardinality,recovered,solver_failure,min_pairwise_distance"]
    for row in report["trial_rows"]:
        dist = "" if row["min_pairwise_distance"] is None else repr(row["min_pairwise_distance"])
        lines.append(f"{row['trial']},{row['count']},{row['cardinality']},"
                     f"{int(row['recovered'])},{int(row['solver_failure'])},{dist}")
    return "\n".join(lines) + "\n"


@dataclass
class CurResult:
    matrix: np.ndarray
    cross_size: int
    pivot_condition: float
    rel_error: float


def cur_reconstruct(A, rows, cols, cond_limit: float = 1e12) -> CurResult:
    """Reconstruct a rank-k matrix from k rows, k columns and their pivot block.

    Computes A_cols (A_rows,cols)^-1 A_rows.  The cross touches
    (d1 + d2 - k) k entries, exactly the dimension of the rank-<=k
    variety.  Raises SingularPivotError when the pivot block is singular
    or its condition number exceeds cond_limit.
    """
    A = np.asarray(A, dtype=float)
    rows = list(rows)
    cols = list(cols)
    if len(rows) != len(cols):
        raise ValueError("row and column index sets must have equal size")
    k = len(rows)
    if k < 1:
        raise ValueError("need at least one pivot row and column")
    d1, d2 = A.shape
    pivot = A[np.ix_(rows, cols)]
    cond = float(np.linalg.cond(pivot)) if np.all(np.isfinite(pivot)) else np.inf
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularPivotError(
            f"pivot block A[{rows}][{cols}] is numerically singular "
            f"(condition {cond:.3e})")
    reconstructed = A[:, cols] @ np.linalg.solve(pivot, A[rows, :])
    denom = np.linalg.norm(A)
    rel_error = float(np.linalg.norm(reconstructed - A) / denom) if denom else 0.0
    return CurResult(
        matrix=reconstructed,
        cross_size=(d1 + d2 - k) * k,
        pivot_condition=cond,
        rel_error=rel_error,
    )


def degree_experiment(curve: ImplicitPlaneCurve, trials: int = 100,
                      master_seed: int = 0) -> dict:
    """Count intersections of random lines through random curve points.

    Each count is multiplicity-weighted affine intersections plus the
    infinity count; constancy across trials exhibits the curve degree.
    """
    counts = []
    for t in range(trials):
        rng = trial_rng(master_seed, t, _PURPOSE_POINT)
        p = random_real_curve_point(curve, rng)
        angle = rng.uniform(0.0, np.pi)
        ell = (float(np.cos(angle)), float(np.sin(angle)))
        line = AffineLine(ell, ell[0] * p[0] + ell[1] * p[1])
        hit = line_intersect(curve, line)
        counts.append(int(hit.total_multiplicity))
    return {
        "kind": "degree_experiment",
        "curve": curve.name,
        "degree": curve.degree,
        "trials": trials,
        "master_seed": master_seed,
        "counts": counts,
        "all_equal_degree": all(c == curve.degree for c in counts),
    }


@dataclass
class AuditReport:
    family: str
    variety: str
    ambient_dim: int
    nondegeneracy_rank: int
    nondegenerate_ok: bool
    irreducible_claim: bool
    local_ranks: list
    local_ok_fraction: float
    warnings: list
    passed: bool

    def to_jsonable(self):
        return asdict(self)


def audit_family(family: MeasurementFamily, variety: ParametricVariety,
                 trials: int = 10, master_seed: int = 0) -> AuditReport:
    """Empirically audit the hypotheses behind the n+1 identifiability bound.

    Checks that sampled functionals span the dual space and that
    intrinsic-dim many samples achieve full local rank at random model
    points.  Families flagged reducible get a warning: the guarantee
    requires an irreducible measurement variety.
    """
    if family.ambient_dim != variety.ambient_dim:
        raise DimensionMismatchError("family and variety dimensions differ")
    rng = trial_rng(master_seed, 0, _PURPOSE_FUNCTIONALS)
    nd_rank = nondegeneracy_rank(family, 4 * family.ambient_dim, rng)
    nondegenerate_ok = nd_rank == family.ambient_dim

    local_ranks = []
    hits = 0
    for t in range(trials):
        theta, _ = random_point(variety, trial_rng(master_seed, t, _PURPOSE_POINT))
        functionals = family.sample_many(
            variety.intrinsic_dim, trial_rng(master_seed, t + 1, _PURPOSE_FUNCTIONALS))
        ok, rank = local_identifiability(variety, functionals, theta)
        local_ranks.append(rank)
        hits += ok

    warnings = []
    if not family.irreducible:
        warnings.append(
            "family is reducible (a finite or disconnected set of functionals); "
            "the dim+1 generic-measurement guarantee does not apply")
    if not nondegenerate_ok:
        warnings.append(
            f"sampled functionals span only {nd_rank} of {family.ambient_dim} "
            "dual dimensions; the family lies in a hyperplane")

    return AuditReport(
        family=family.name,
        variety=variety.name,
        ambient_dim=family.ambient_dim,
        nondegeneracy_rank=nd_rank,
        nondegenerate_ok=nondegenerate_ok,
        irreducible_claim=family.irreducible,
        local_ranks=local_ranks,
        local_ok_fraction=hits / trials,
        warnings=warnings,
        passed=nondegenerate_ok,
    )

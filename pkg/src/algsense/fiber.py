"""Fiber enumeration by multi-start damped least squares.

Given a measurement system over a parametric variety, the solver hunts
for every parameter vector theta with ell_i(phi(theta)) = y_i, maps the
survivors to ambient space, and clusters them there (parameter-space
distance is meaningless under gauge freedom).  The damped Gauss-Newton
loop is the package's hot kernel; it runs either as a numba-compiled
per-start loop or as a lock-step vectorized numpy iteration, selected by
the backend flag.  Both apply identical update rules.
"""

from dataclasses import dataclass, field

import numpy as np

from .backend import NUMBA_ENABLED, jit
from .errors import DimensionMismatchError
from .numerics import numerical_rank
from .polymap import _eval_terms_jit
from .varieties import ParametricVariety, evaluate

DAMPING_MIN = 1e-12
DAMPING_MAX = 1e12
DAMPING_DOWN = 3.0
DAMPING_UP = 10.0
STEP_TOL = 1e-14


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the multi-start solver.

    Convergence is declared at ||r|| <= residual_tol * (1 + ||y||);
    ambient points closer than cluster_tol are considered the same fiber
    point.
    """

    num_starts: int = 200
    max_iters: int = 200
    residual_tol: float = 1e-10
    cluster_tol: float = 1e-6
    damping_init: float = 1e-3
    start_radius: float = 2.0

    def __post_init__(self):
        if min(self.num_starts, self.max_iters) < 1:
            raise ValueError("num_starts and max_iters must be positive")
        if min(self.residual_tol, self.cluster_tol,
               self.damping_init, self.start_radius) <= 0:
            raise ValueError("tolerances and scales must be positive")
        if self.cluster_tol <= self.residual_tol:
            raise ValueError("cluster_tol must exceed residual_tol")


@dataclass
class LocalSolveResult:
    theta: np.ndarray
    success: bool
    residual_norm: float
    iterations: int


@dataclass
class FiberReport:
    """Distinct solutions found for a measurement system."""

    points: list
    residuals: np.ndarray
    basin_counts: np.ndarray
    failed_starts: int
    contains_target: bool | None = None
    target_index: int | None = None

    def __len__(self):
        return len(self.points)

    @property
    def cardinality(self) -> int:
        return len(self.points)

    def min_pairwise_distance(self) -> float:
        if len(self.points) < 2:
            return float("inf")
        pts = np.stack(self.points)
        dists = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        return float(np.min(dists[np.triu_indices(len(pts), k=1)]))

    def to_jsonable(self):
        out = {
            "points": [p.tolist() for p in self.points],
            "residuals": self.residuals.tolist(),
            "basin_counts": self.basin_counts.tolist(),
            "failed_starts": int(self.failed_starts),
        }
        if self.contains_target is not None:
            out["contains_target"] = bool(self.contains_target)
            out["target_index"] = self.target_index
        return out


def residual(variety: ParametricVariety, system, theta):
    """r_i(theta) = ell_i(phi(theta)) - y_i."""
    L = system.coeff_matrix()
    if L.shape[1] != variety.ambient_dim:
        raise DimensionMismatchError("functionals do not match ambient dimension")
    return L @ evaluate(variety, theta) - system.values


def residual_jacobian(variety: ParametricVariety, system, theta):
    """Row i is coeffs_i^T d(phi)/d(theta)."""
    L = system.coeff_matrix()
    if L.shape[1] != variety.ambient_dim:
        raise DimensionMismatchError("functionals do not match ambient dimension")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (variety.param_dim,):
        raise DimensionMismatchError("theta length does not match param_dim")
    return L @ variety.jac(theta)


def _lm_multistart(starts, L, y, ambient_dim,
                   e_coeff, e_out, e_ptr, e_vidx, e_vexp,
                   j_coeff, j_out, j_ptr, j_vidx, j_vexp,
                   max_iters, tol_abs, damping_init):
    num_starts, p = starts.shape
    jac_dim = ambient_dim * p
    thetas = np.empty((num_starts, p))
    ok = np.zeros(num_starts, dtype=np.bool_)
    resnorms = np.empty(num_starts)
    iters = np.zeros(num_starts, dtype=np.int64)
    eye = np.eye(p)
    for s in range(num_starts):
        theta = starts[s].copy()
        phi = _eval_terms_jit(theta, ambient_dim, e_coeff, e_out, e_ptr,
                              e_vidx, e_vexp)
        r = L @ phi - y
        rn = np.sqrt(np.sum(r * r))
        lam = damping_init
        it = 0
        while it < max_iters:
            if rn <= tol_abs:
                break
            jflat = _eval_terms_jit(theta, jac_dim, j_coeff, j_out, j_ptr,
                                    j_vidx, j_vexp)
            jac = L @ jflat.reshape(ambient_dim, p)
            normal = jac.T @ jac + lam * eye
            grad = jac.T @ r
            finite = True
            for a in range(p):
                if not np.isfinite(grad[a]):
                    finite = False
                for b in range(p):
                    if not np.isfinite(normal[a, b]):
                        finite = False
            if not finite:
                break
            delta = np.linalg.solve(normal, grad)
            trial = theta - delta
            phi_t = _eval_terms_jit(trial, ambient_dim, e_coeff, e_out, e_ptr,
                                    e_vidx, e_vexp)
            r_t = L @ phi_t - y
            rn_t = np.sqrt(np.sum(r_t * r_t))
            it += 1
            if rn_t < rn:
                theta = trial
                r = r_t
                rn = rn_t
                lam = max(lam / DAMPING_DOWN, DAMPING_MIN)
            else:
                lam *= DAMPING_UP
                if lam > DAMPING_MAX:
                    break
            dn = np.sqrt(np.sum(delta * delta))
            tn = np.sqrt(np.sum(theta * theta))
            if dn <= STEP_TOL * (1.0 + tn):
                break
        thetas[s] = theta
        resnorms[s] = rn
        iters[s] = it
        ok[s] = rn <= tol_abs
    return thetas, ok, resnorms, iters


_lm_multistart_jit = jit(_lm_multistart)


def _lm_multistart_numpy(starts, L, y, pmap, max_iters, tol_abs, damping_init):
    # lock-step vectorized twin of _lm_multistart
    num_starts, p = starts.shape
    theta = starts.copy()
    r = pmap.eval_batch(theta) @ L.T - y
    rn = np.linalg.norm(r, axis=1)
    lam = np.full(num_starts, damping_init)
    alive = np.ones(num_starts, dtype=bool)
    iters = np.zeros(num_starts, dtype=np.int64)
    eye = np.eye(p)
    for _ in range(max_iters):
        act = alive & (rn > tol_abs)
        if not act.any():
            break
        idx = np.nonzero(act)[0]
        jac = L[None, :, :] @ pmap.jac_batch(theta[idx])
        jac_t = jac.transpose(0, 2, 1)
        normal = jac_t @ jac + lam[idx, None, None] * eye
        grad = (jac_t @ r[idx, :, None])[:, :, 0]
        finite = np.isfinite(normal).all(axis=(1, 2)) & np.isfinite(grad).all(axis=1)
        if not finite.all():
            alive[idx[~finite]] = False
            idx = idx[finite]
            if idx.size == 0:
                continue
            normal = normal[finite]
            grad = grad[finite]
        delta = np.linalg.solve(normal, grad[:, :, None])[:, :, 0]
        trial = theta[idx] - delta
        r_t = pmap.eval_batch(trial) @ L.T - y
        rn_t = np.linalg.norm(r_t, axis=1)
        iters[idx] += 1
        better = rn_t < rn[idx]
        acc = idx[better]
        theta[acc] = trial[better]
        r[acc] = r_t[better]
        rn[acc] = rn_t[better]
        lam[acc] = np.maximum(lam[acc] / DAMPING_DOWN, DAMPING_MIN)
        rej = idx[~better]
        lam[rej] *= DAMPING_UP
        alive[rej[lam[rej] > DAMPING_MAX]] = False
        dn = np.linalg.norm(delta, axis=1)
        tn = np.linalg.norm(theta[idx], axis=1)
        alive[idx[dn <= STEP_TOL * (1.0 + tn)]] = False
    ok = rn <= tol_abs
    return theta, ok, rn, iters


def _run_multistart(pmap, L, y, starts, opts: SolverOptions):
    L = np.ascontiguousarray(L, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    starts = np.ascontiguousarray(starts, dtype=np.float64)
    tol_abs = opts.residual_tol * (1.0 + np.linalg.norm(y))
    if NUMBA_ENABLED:
        d = pmap.derivative
        return _lm_multistart_jit(
            starts, L, y, pmap.out_dim,
            pmap.coeff, pmap.out_idx, pmap.term_ptr, pmap.var_idx, pmap.var_exp,
            d.coeff, d.out_idx, d.term_ptr, d.var_idx, d.var_exp,
            opts.max_iters, tol_abs, opts.damping_init,
        )
    return _lm_multistart_numpy(starts, L, y, pmap, opts.max_iters, tol_abs,
                                opts.damping_init)


def local_solve(variety: ParametricVariety, system, theta0,
                opts: SolverOptions | None = None) -> LocalSolveResult:
    """Damped Gauss-Newton from one start; failure is a result, not an error."""
    opts = opts or SolverOptions()
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (variety.param_dim,):
        raise DimensionMismatchError("theta0 length does not match param_dim")
    thetas, ok, rn, iters = _run_multistart(
        variety.pmap, system.coeff_matrix(), system.values, theta0[None, :], opts)
    return LocalSolveResult(thetas[0], bool(ok[0]), float(rn[0]), int(iters[0]))


def _make_starts(variety, opts, rng, target_theta):
    p = variety.param_dim
    if target_theta is None:
        return rng.standard_normal((opts.num_starts, p)) * opts.start_radius
    # 3:1 mix of global exploration and local perturbations of the target
    num_local = opts.num_starts // 4
    num_global = opts.num_starts - num_local
    global_starts = rng.standard_normal((num_global, p)) * opts.start_radius
    scale = 0.01 * (1.0 + np.linalg.norm(target_theta))
    local_starts = target_theta + scale * rng.standard_normal((num_local, p))
    return np.vstack([global_starts, local_starts])


def enumerate_fiber(variety: ParametricVariety, system,
                    opts: SolverOptions | None = None,
                    target_theta=None, target_point=None,
                    rng=None) -> FiberReport:
    """Enumerate the solutions of the system on the variety.

    Runs ``opts.num_starts`` local solves from Gaussian starts (mixed
    with perturbations of ``target_theta`` when given), maps converged
    parameters to ambient space, and greedily clusters them at
    ``opts.cluster_tol``, lowest residual first.  Representatives are
    reported sorted by basin count descending.  When ``target_point`` is
    given, the report records whether some representative matches it.
    """
    opts = opts or SolverOptions()
    if len(system) < 1:
        raise ValueError("need at least one measurement")
    rng = rng if rng is not None else np.random.default_rng(0)
    if target_theta is not None:
        target_theta = np.asarray(target_theta, dtype=float)

    starts = _make_starts(variety, opts, rng, target_theta)
    thetas, ok, resnorms, _ = _run_multistart(
        variety.pmap, system.coeff_matrix(), system.values, starts, opts)

    failed = int(np.sum(~ok))
    good = np.nonzero(ok)[0]
    # greedy clustering, ascending residual so cluster reps are the
    # best-converged representatives
    order = good[np.lexsort((good, resnorms[good]))]
    reps, rep_res, counts = [], [], []
    for s in order:
        point = variety.eval(thetas[s])
        placed = False
        for c, rep in enumerate(reps):
            if np.linalg.norm(point - rep) <= opts.cluster_tol:
                counts[c] += 1
                placed = True
                break
        if not placed:
            reps.append(point)
            rep_res.append(resnorms[s])
            counts.append(1)

    if reps:
        rank = np.lexsort((np.arange(len(reps)), rep_res, -np.asarray(counts)))
    else:
        rank = np.array([], dtype=int)
    points = [reps[i] for i in rank]
    residuals = np.array([rep_res[i] for i in rank])
    basin_counts = np.array([counts[i] for i in rank], dtype=int)

    contains, target_index = None, None
    if target_point is not None:
        target_point = np.asarray(target_point, dtype=float)
        contains = False
        for i, pt in enumerate(points):
            if np.linalg.norm(pt - target_point) <= opts.cluster_tol:
                contains, target_index = True, i
                break

    return FiberReport(points, residuals, basin_counts, failed,
                       contains, target_index)


def local_identifiability(variety: ParametricVariety, functionals, theta):
    """Rank test: do the cuts pin down the point up to gauge, locally?

    Returns ``(identifiable, rank)`` where rank is the numerical rank of
    the residual Jacobian; equality with the intrinsic dimension means
    the measurements locally separate everything except the gauge orbit.
    """
    L = np.stack([f.coeffs for f in functionals])
    if L.shape[1] != variety.ambient_dim:
        raise DimensionMismatchError("functionals do not match ambient dimension")
    theta = np.asarray(theta, dtype=float)
    rank = numerical_rank(L @ variety.jac(theta))
    return rank == variety.intrinsic_dim, rank


@dataclass(frozen=True)
class CutStep:
    step: int
    rank: int
    degenerate: bool


def genericity_witness_check(variety: ParametricVariety, functionals, theta):
    """Sequential dimension-drop audit of a measurement tuple.

    Step j reports the rank of the first j residual-Jacobian rows; a step
    is flagged degenerate when the rank fails to grow while still below
    the intrinsic dimension, the local analogue of a cut that misses a
    component of the current section.
    """
    L = np.stack([f.coeffs for f in functionals])
    if L.shape[1] != variety.ambient_dim:
        raise DimensionMismatchError("functionals do not match ambient dimension")
    theta = np.asarray(theta, dtype=float)
    rows = L @ variety.jac(theta)
    steps = []
    prev = 0
    for j in range(1, len(functionals) + 1):
        rank = numerical_rank(rows[:j])
        degenerate = rank == prev and prev < variety.intrinsic_dim
        steps.append(CutStep(j, rank, degenerate))
        prev = rank
    return steps

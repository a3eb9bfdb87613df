"""Exact-count computations for plane curves over the complex numbers.

Line-curve intersections are reduced to univariate root finding; degree
drop of the substituted polynomial is reported as intersections at
infinity, so multiplicity-counted affine points plus the infinity count
always reproduce the curve degree.  All arithmetic is complex double
precision.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import LineOnCurveError, RootFindingError
from .varieties import ImplicitPlaneCurve

# coefficients at or below TRIM_REL_TOL times the largest one are treated
# as zero; every trimmed leading coefficient is one intersection at infinity
TRIM_REL_TOL = 1e-12
ROOT_CLUSTER_TOL = 1e-6
ON_CURVE_TOL = 1e-8


class ComplexPoint(NamedTuple):
    x1: complex
    x2: complex

    def is_real(self, tol: float = 1e-8) -> bool:
        return abs(self.x1.imag) <= tol and abs(self.x2.imag) <= tol

    def real_pair(self):
        return float(self.x1.real), float(self.x2.real)


@dataclass(frozen=True)
class AffineLine:
    """The affine hyperplane {v : ell(v) = offset} in the plane."""

    coeffs: tuple
    offset: float

    def __post_init__(self):
        a = np.asarray(self.coeffs, dtype=float)
        if a.shape != (2,) or not np.any(a):
            raise ValueError("line needs a nonzero coefficient pair")
        object.__setattr__(self, "coeffs", (float(a[0]), float(a[1])))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def base(self) -> np.ndarray:
        a = np.asarray(self.coeffs)
        return self.offset * a / np.dot(a, a)

    @property
    def direction(self) -> np.ndarray:
        a1, a2 = self.coeffs
        d = np.array([-a2, a1])
        return d / np.linalg.norm(d)

    def __call__(self, point):
        return self.coeffs[0] * point[0] + self.coeffs[1] * point[1]


def _trim_leading(coeffs, rel_tol: float = TRIM_REL_TOL):
    """Drop numerically-zero top coefficients; returns (trimmed, dropped)."""
    coeffs = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(coeffs))
    keep = len(coeffs)
    while keep > 1 and abs(coeffs[keep - 1]) <= rel_tol * scale:
        keep -= 1
    return coeffs[:keep], len(coeffs) - keep


def _horner_with_derivative(coeffs, z):
    p = np.full_like(z, coeffs[-1])
    dp = np.zeros_like(z)
    for c in coeffs[-2::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def poly_backward_error(coeffs, z):
    """|p(z)| relative to max|coeff| * (1 + |z|)^degree."""
    coeffs = np.asarray(coeffs, dtype=complex)
    z = np.asarray(z, dtype=complex)
    p, _ = _horner_with_derivative(coeffs, z)
    degree = len(coeffs) - 1
    return np.abs(p) / (np.max(np.abs(coeffs)) * (1.0 + np.abs(z)) ** degree)


def univariate_roots(coeffs, backward_tol: float = 1e-8,
                     max_iter: int = 400) -> np.ndarray:
    """All complex roots (with multiplicity) of an ascending-coefficient polynomial.

    Simultaneous Aberth-Ehrlich iteration from a Cauchy-bound circle;
    each returned root satisfies |p(z)| <= backward_tol * max|coeff| *
    (1 + |z|)^degree.  Companion-matrix eigenvalues serve as a safety
    net on the rare non-converged instance.
    """
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if coeffs.size == 0 or not np.any(coeffs):
        raise ValueError("zero polynomial rejected")
    coeffs, _ = _trim_leading(coeffs)
    n = len(coeffs) - 1
    if n == 0:
        return np.array([], dtype=complex)

    monic = coeffs / coeffs[-1]
    radius = 1.0 + np.max(np.abs(monic[:-1]))
    angles = 2.0 * np.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * angles)

    scale = np.max(np.abs(coeffs))
    for _ in range(max_iter):
        p, dp = _horner_with_derivative(monic, z)
        err = np.abs(p) * np.abs(coeffs[-1]) / (scale * (1.0 + np.abs(z)) ** n)
        if np.all(err <= 1e-14):
            break
        dp = np.where(dp == 0, np.finfo(float).eps, dp)
        w = p / dp
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        s = np.sum(1.0 / diff, axis=1) - 1.0  # remove the diagonal fill
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-12, 1.0, denom)
        step = w / denom
        z = z - step
        if np.max(np.abs(step)) <= 1e-15 * (1.0 + np.max(np.abs(z))):
            break

    if np.any(poly_backward_error(coeffs, z) > backward_tol):
        z = np.roots(coeffs[::-1])
        if np.any(poly_backward_error(coeffs, z) > backward_tol):
            raise RootFindingError(
                f"root refinement stalled above backward error {backward_tol:g}")
    return z


def cluster_roots(roots, tol: float = ROOT_CLUSTER_TOL):
    """Merge root approximations within tol; returns (centers, multiplicities)."""
    roots = np.asarray(roots, dtype=complex)
    order = np.lexsort((roots.imag, roots.real))
    roots = roots[order]
    parent = list(range(len(roots)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) <= tol:
                parent[find(j)] = find(i)
    groups = {}
    for i in range(len(roots)):
        groups.setdefault(find(i), []).append(roots[i])
    centers = [np.mean(g) for g in groups.values()]
    mults = [len(g) for g in groups.values()]
    order = np.lexsort((np.imag(centers), np.real(centers)))
    return [centers[i] for i in order], [mults[i] for i in order]


@dataclass
class LineIntersection:
    points: list
    multiplicities: list
    infinity_count: int

    @property
    def distinct_affine_count(self) -> int:
        return len(self.points)

    @property
    def total_multiplicity(self) -> int:
        return sum(self.multiplicities) + self.infinity_count


def _substitute_line(curve: ImplicitPlaneCurve, line: AffineLine) -> np.ndarray:
    """Ascending coefficients of t -> f(base + t * direction)."""
    b = line.base
    d = line.direction
    deg = curve.degree
    pow1 = [np.array([1.0 + 0j])]
    pow2 = [np.array([1.0 + 0j])]
    lin1 = np.array([b[0], d[0]], dtype=complex)
    lin2 = np.array([b[1], d[1]], dtype=complex)
    for _ in range(deg):
        pow1.append(np.convolve(pow1[-1], lin1))
        pow2.append(np.convolve(pow2[-1], lin2))
    out = np.zeros(deg + 1, dtype=complex)
    for i, j in zip(*np.nonzero(curve.coeffs)):
        contrib = curve.coeffs[i, j] * np.convolve(pow1[i], pow2[j])
        out[: len(contrib)] += contrib
    return out


def line_intersect(curve: ImplicitPlaneCurve, line: AffineLine) -> LineIntersection:
    """Affine intersection points of the curve with a line, with multiplicities.

    Degree drop of the substituted polynomial (relative to the curve
    degree) counts intersections on the line at infinity.
    """
    coeffs = _substitute_line(curve, line)
    composition_scale = (np.max(np.abs(curve.coeffs))
                         * (1.0 + np.linalg.norm(line.base)) ** curve.degree)
    if np.max(np.abs(coeffs)) <= TRIM_REL_TOL * composition_scale:
        raise LineOnCurveError("line lies on the curve; intersection not finite")
    trimmed, dropped = _trim_leading(coeffs)
    if len(trimmed) == 1:
        return LineIntersection([], [], curve.degree)
    roots = univariate_roots(trimmed)
    centers, mults = cluster_roots(roots)
    b = line.base
    d = line.direction
    points = [ComplexPoint(complex(b[0] + t * d[0]), complex(b[1] + t * d[1]))
              for t in centers]
    return LineIntersection(points, mults, curve.degree - (len(trimmed) - 1))


def tangent_line(curve: ImplicitPlaneCurve, point) -> AffineLine:
    """Tangent line at a smooth real curve point: grad f(p) . v = grad f(p) . p."""
    p = np.asarray(point, dtype=float)
    if abs(curve(p[0], p[1])) > ON_CURVE_TOL:
        raise ValueError(f"point {point} is not on the curve")
    g1, g2 = curve.grad(p[0], p[1])
    if max(abs(g1), abs(g2)) <= 1e-10:
        raise ValueError(f"point {point} is singular; no unique tangent")
    return AffineLine((g1, g2), g1 * p[0] + g2 * p[1])


def _second_partial(table: np.ndarray, u: int, v: int) -> np.ndarray:
    out = table
    for var in (u, v):
        shifted = np.zeros_like(out)
        idx = [slice(None)] * 3
        src = [slice(None)] * 3
        idx[var] = slice(0, out.shape[var] - 1)
        src[var] = slice(1, out.shape[var])
        weights = np.arange(1, out.shape[var])
        shape = [1, 1, 1]
        shape[var] = len(weights)
        shifted[tuple(idx)] = out[tuple(src)] * weights.reshape(shape)
        out = shifted
    return out


def _tri_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(tuple(np.array(a.shape) + np.array(b.shape) - 1))
    for ia in zip(*np.nonzero(a)):
        for ib in zip(*np.nonzero(b)):
            out[ia[0] + ib[0], ia[1] + ib[1], ia[2] + ib[2]] += a[ia] * b[ib]
    return out


def hessian_determinant(curve: ImplicitPlaneCurve) -> ImplicitPlaneCurve:
    """Dehomogenized Hessian determinant of the curve's homogenization.

    Normalized by its graded-lex leading coefficient; its zero locus on
    the curve marks the inflection points.
    """
    hom = curve.homogenization
    H = [[_second_partial(hom, u, v) for v in range(3)] for u in range(3)]
    det = None
    for perm, sign in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
                       ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1)):
        prod = _tri_mul(_tri_mul(H[0][perm[0]], H[1][perm[1]]), H[2][perm[2]])
        det = sign * prod if det is None else det + sign * prod
    # set x0 = 1
    table = det.sum(axis=0)
    scale = np.max(np.abs(table))
    if scale == 0.0:
        raise ValueError("Hessian determinant vanishes identically")
    table[np.abs(table) <= TRIM_REL_TOL * scale] = 0.0
    deg = int(max(i + j for i, j in zip(*np.nonzero(table))))
    lead = next(table[i, deg - i] for i in range(deg, -1, -1)
                if table[i, deg - i] != 0.0)
    return ImplicitPlaneCurve(table / lead, name=f"hessian({curve.name})")


def hessian_inflection_system(curve: ImplicitPlaneCurve):
    """The polynomial pair {f, h} cutting out the affine inflection points."""
    return curve, hessian_determinant(curve)


def _even_x2_parts(curve: ImplicitPlaneCurve):
    """Coefficient vectors h_k(x1) of h = sum_k h_k(x1) (x2^2)^k; rejects odd terms."""
    table = curve.coeffs
    scale = np.max(np.abs(table))
    odd = table[:, 1::2]
    if np.any(np.abs(odd) > 1e-9 * scale):
        raise ValueError("polynomial is not even in x2")
    return [np.asarray(table[:, 2 * k], dtype=complex)
            for k in range((table.shape[1] + 1) // 2)]


def inflection_points(curve: ImplicitPlaneCurve) -> list:
    """The affine inflection points of a cubic x2^2 = g(x1).

    Both f and its Hessian determinant are even in x2, so substituting
    x2^2 = g(x1) reduces the system to one univariate polynomial in x1;
    each of its roots lifts to a pair of points (x1, +-sqrt(g(x1))).
    """
    f_parts = _even_x2_parts(curve)
    scale = np.max(np.abs(curve.coeffs))
    if len(f_parts) < 2:
        raise ValueError("curve has no x2^2 term")
    for part in f_parts[2:]:
        if np.max(np.abs(part)) > 1e-12 * scale:
            raise ValueError("curve is not of the form c * x2^2 = g(x1)")
    c2 = f_parts[1]
    if np.max(np.abs(c2[1:])) > 1e-12 * scale or c2[0] == 0:
        raise ValueError("curve is not of the form c * x2^2 = g(x1)")
    g = -f_parts[0] / c2[0]

    h = hessian_determinant(curve)
    h_parts = _even_x2_parts(h)
    u = np.zeros(1, dtype=complex)
    g_power = np.array([1.0 + 0j])
    for k, part in enumerate(h_parts):
        if k > 0:
            g_power = np.convolve(g_power, g)
        term = np.convolve(part, g_power)
        if len(term) > len(u):
            u, term = term.copy(), u
        u[: len(term)] += term

    points = []
    for x1 in univariate_roots(u):
        gval = np.polyval(g[::-1], x1)
        x2 = np.sqrt(complex(gval))
        points.append(ComplexPoint(complex(x1), complex(x2)))
        points.append(ComplexPoint(complex(x1), complex(-x2)))
    points.sort(key=lambda p: (p.x1.real, p.x1.imag, p.x2.real, p.x2.imag))
    return points


@dataclass
class ScanReport:
    angles: np.ndarray
    distinct_counts: np.ndarray
    infinity_counts: np.ndarray

    @property
    def min_count(self) -> int:
        return int(np.min(self.distinct_counts))

    @property
    def max_count(self) -> int:
        return int(np.max(self.distinct_counts))


def single_measurement_scan(curve: ImplicitPlaneCurve, point,
                            num_directions: int = 360) -> ScanReport:
    """Sweep functionals (cos a, sin a), a in [0, pi), through the point.

    For each direction the report records how many distinct affine
    complex points the induced level line shares with the curve; a
    minimum of one would exhibit a single measurement that identifies
    the point.
    """
    p = np.asarray(point, dtype=float)
    if abs(curve(p[0], p[1])) > ON_CURVE_TOL:
        raise ValueError(f"point {point} is not on the curve")
    angles = np.pi * np.arange(num_directions) / num_directions
    counts = np.empty(num_directions, dtype=int)
    infinities = np.empty(num_directions, dtype=int)
    for i, a in enumerate(angles):
        ell = (np.cos(a), np.sin(a))
        line = AffineLine(ell, ell[0] * p[0] + ell[1] * p[1])
        hit = line_intersect(curve, line)
        counts[i] = hit.distinct_affine_count
        infinities[i] = hit.infinity_count
    return ScanReport(angles, counts, infinities)


@dataclass
class ConicTangentRecord:
    tangent: AffineLine
    tangent_hits: LineIntersection
    perturbed: AffineLine
    perturbed_hits: LineIntersection
    unique_double_point: bool
    perturbed_two_points: bool


def conic_tangent_recovery(conic: ImplicitPlaneCurve, point,
                           rng=None) -> ConicTangentRecord:
    """Demonstrate the tangent cut at a smooth conic point.

    The tangent meets the conic in the single point with multiplicity 2
    (the one non-generic functional that identifies the point alone); a
    perturbed functional through the same point meets it in two distinct
    points again.
    """
    if conic.degree != 2:
        raise ValueError("conic_tangent_recovery needs a degree-2 curve")
    rng = rng if rng is not None else np.random.default_rng(0)
    p = np.asarray(point, dtype=float)
    tangent = tangent_line(conic, p)
    hits = line_intersect(conic, tangent)
    unique_double = (
        len(hits.points) == 1
        and hits.multiplicities[0] == 2
        and abs(hits.points[0].x1 - p[0]) <= 1e-6
        and abs(hits.points[0].x2 - p[1]) <= 1e-6
    )

    angle = rng.uniform(0.2, 1.2)
    c, s = np.cos(angle), np.sin(angle)
    a1, a2 = tangent.coeffs
    rotated = (c * a1 - s * a2, s * a1 + c * a2)
    perturbed = AffineLine(rotated, rotated[0] * p[0] + rotated[1] * p[1])
    perturbed_hits = line_intersect(conic, perturbed)
    return ConicTangentRecord(
        tangent, hits, perturbed, perturbed_hits,
        unique_double, perturbed_hits.distinct_affine_count == 2,
    )


def curve_points_at_x1(curve: ImplicitPlaneCurve, x1) -> np.ndarray:
    """Complex x2 solutions of f(x1, x2) = 0 along a vertical line."""
    section = curve.x2_section(x1)
    return univariate_roots(section)


def random_real_curve_point(curve: ImplicitPlaneCurve, rng,
                            x_scale: float = 1.5, max_tries: int = 200):
    """A random real point of the curve, found along random vertical lines."""
    for _ in range(max_tries):
        x1 = float(rng.standard_normal() * x_scale)
        roots = curve_points_at_x1(curve, x1)
        real = roots[np.abs(roots.imag) <= 1e-9]
        if real.size:
            x2 = float(np.real(rng.choice(real)))
            return np.array([x1, x2])
    raise RootFindingError("no real curve point found on sampled vertical lines")


def figure_data(curve: ImplicitPlaneCurve, branch_samples: int = 200):
    """Plot-data rows for a cubic x2^2 = g(x1): real branches plus labels.

    Rows are dicts with keys label, x1, x2; branch rows sample the two
    real components, q1..q3 are the vertical-tangent points on the x1
    axis, p1..p2 the real inflection points.
    """
    f_parts = _even_x2_parts(curve)
    g = np.real(-f_parts[0] / f_parts[1][0])
    g_roots = np.sort(np.real(univariate_roots(g.astype(complex))))
    if len(g_roots) != 3:
        raise ValueError("expected a cubic with three real axis crossings")

    def g_at(x):
        return np.polyval(g[::-1], x)

    rows = []
    span = max(g_roots[2] - g_roots[0], 1.0)
    intervals = [(g_roots[0], g_roots[1]), (g_roots[2], g_roots[2] + span)]
    for lo, hi in intervals:
        xs = np.linspace(lo, hi, branch_samples // 2)
        ys = np.sqrt(np.maximum(g_at(xs), 0.0))
        for x, y in zip(xs, ys):
            rows.append({"label": "branch", "x1": float(x), "x2": float(y)})
            rows.append({"label": "branch", "x1": float(x), "x2": float(-y)})
    for i, r in enumerate(g_roots, start=1):
        rows.append({"label": f"q{i}", "x1": float(r), "x2": 0.0})
    real_inflections = [p for p in inflection_points(curve) if p.is_real()]
    real_inflections.sort(key=lambda p: -p.x2.real)
    for i, p in enumerate(real_inflections, start=1):
        rows.append({"label": f"p{i}", "x1": float(p.x1.real),
                     "x2": float(p.x2.real)})
    return rows

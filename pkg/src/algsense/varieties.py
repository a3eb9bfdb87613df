"""Model varieties: polynomial parametrizations and implicit plane curves.

Parametric models cover the recovery experiments (bounded-rank matrices,
the plane parabola, polynomial coefficient models); implicit plane curves
back the exact degree and sharpness studies.
"""

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import DimensionMismatchError
from .numerics import numerical_rank
from .polymap import PolynomialMap, coefficient_space_dim, monomial_exponents


@dataclass(frozen=True)
class ParametricVariety:
    """Image of a polynomial map theta -> phi(theta) in R^ambient_dim.

    ``intrinsic_dim`` is the dimension of the image; ``gauge_dim`` counts
    the continuous symmetries of the parametrization, so ``intrinsic_dim
    + gauge_dim == param_dim`` always holds.
    """

    name: str
    ambient_dim: int
    param_dim: int
    intrinsic_dim: int
    gauge_dim: int
    pmap: PolynomialMap = field(repr=False)

    def __post_init__(self):
        if self.intrinsic_dim + self.gauge_dim != self.param_dim:
            raise ValueError("intrinsic_dim + gauge_dim must equal param_dim")
        if min(self.ambient_dim, self.param_dim, self.intrinsic_dim) < 1:
            raise ValueError("dimensions must be positive")
        if self.gauge_dim < 0:
            raise ValueError("gauge_dim must be nonnegative")
        if (self.pmap.param_dim, self.pmap.out_dim) != (self.param_dim, self.ambient_dim):
            raise ValueError("term table shape disagrees with declared dimensions")

    def eval(self, theta):
        """phi(theta) as a flat ambient vector."""
        return self.pmap(theta)

    def jac(self, theta):
        """Jacobian of phi at theta, shape (ambient_dim, param_dim)."""
        return self.pmap.jac(theta)


def evaluate(variety: ParametricVariety, theta):
    """Evaluate the parametrization; rejects wrong-length theta."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (variety.param_dim,):
        raise DimensionMismatchError(
            f"{variety.name}: expected theta of length {variety.param_dim}, "
            f"got shape {theta.shape}"
        )
    return variety.eval(theta)


def random_point(variety: ParametricVariety, rng):
    """Draw theta with standard-normal entries; return (theta, phi(theta))."""
    theta = rng.standard_normal(variety.param_dim)
    return theta, variety.eval(theta)


def make_low_rank(d1: int, d2: int, k: int) -> ParametricVariety:
    """Matrices of rank at most k in R^{d1 x d2}, as row-major flat vectors.

    Parametrized by phi(U, W) = U W^T with U of shape (d1, k) and W of
    shape (d2, k); theta stacks row-major vec(U) then vec(W).  The
    GL(k) reparametrization (U G, W G^-T) leaves phi fixed, giving gauge
    dimension k^2 and intrinsic dimension (d1 + d2 - k) k.
    """
    if min(d1, d2, k) < 1:
        raise ValueError("d1, d2, k must be positive")
    if k > min(d1, d2):
        raise ValueError(f"rank bound k={k} exceeds min(d1, d2)={min(d1, d2)}")
    terms = []
    w_off = d1 * k
    for i in range(d1):
        for j in range(d2):
            for l in range(k):
                terms.append((i * d2 + j, 1.0, {i * k + l: 1, w_off + j * k + l: 1}))
    pmap = PolynomialMap((d1 + d2) * k, d1 * d2, terms)
    return ParametricVariety(
        name=f"low_rank({d1},{d2},{k})",
        ambient_dim=d1 * d2,
        param_dim=(d1 + d2) * k,
        intrinsic_dim=(d1 + d2 - k) * k,
        gauge_dim=k * k,
        pmap=pmap,
    )


def make_parabola() -> ParametricVariety:
    """The plane parabola t -> (t, t^2)."""
    pmap = PolynomialMap(1, 2, [(0, 1.0, {0: 1}), (1, 1.0, {0: 2})])
    return ParametricVariety(
        name="parabola", ambient_dim=2, param_dim=1,
        intrinsic_dim=1, gauge_dim=0, pmap=pmap,
    )


def _probe_jacobian_rank(pmap: PolynomialMap, probes: int = 3) -> int:
    # generic rank of the parametrization, probed at fixed random points
    rng = np.random.default_rng(0x5EED)
    return max(
        numerical_rank(pmap.jac(rng.standard_normal(pmap.param_dim)))
        for _ in range(probes)
    )


def make_veronese_model(d: int, m: int, model: str = "full",
                        support=None, rank: int | None = None) -> ParametricVariety:
    """Models inside the coefficient space of d-variate polynomials of degree <= m.

    Coefficients are indexed by the graded-lexicographic monomial order of
    ``monomial_exponents(d, m)``.  Supported models:

    * ``full``: the whole coefficient space.
    * ``sparse``: polynomials supported on the given exponent tuples.
    * ``waring``: sums of ``rank`` powers of lifted linear forms,
      phi(c, a) = sum_j c_j <a_j, (1, t)>^m, with a_j in R^{d+1}.

    The intrinsic dimension of the waring model is probed numerically
    from the Jacobian rank (low-degree power models can be defective, so
    the naive parameter count is not trusted).
    """
    if d < 1 or m < 1:
        raise ValueError("d and m must be positive")
    exps = monomial_exponents(d, m, lifted=True)
    ambient = len(exps)
    index_of = {e: i for i, e in enumerate(exps)}

    if model == "full":
        terms = [(i, 1.0, {i: 1}) for i in range(ambient)]
        pmap = PolynomialMap(ambient, ambient, terms)
        return ParametricVariety(
            name=f"poly_space(d={d},m={m})", ambient_dim=ambient,
            param_dim=ambient, intrinsic_dim=ambient, gauge_dim=0, pmap=pmap,
        )

    if model == "sparse":
        if not support:
            raise ValueError("sparse model needs a nonempty support pattern")
        support = [tuple(int(v) for v in e) for e in support]
        if len(set(support)) != len(support):
            raise ValueError("duplicate exponent tuples in support")
        if len(support) > ambient:
            raise ValueError("support size exceeds coefficient space dimension")
        missing = [e for e in support if e not in index_of]
        if missing:
            raise ValueError(f"exponent tuples outside degree-{m} space: {missing}")
        terms = [(index_of[e], 1.0, {j: 1}) for j, e in enumerate(support)]
        pmap = PolynomialMap(len(support), ambient, terms)
        return ParametricVariety(
            name=f"sparse_poly(d={d},m={m},s={len(support)})", ambient_dim=ambient,
            param_dim=len(support), intrinsic_dim=len(support), gauge_dim=0, pmap=pmap,
        )

    if model == "waring":
        if rank is None or rank < 1:
            raise ValueError("waring model needs a positive rank")
        if rank > ambient:
            raise ValueError("waring rank exceeds coefficient space dimension")
        # theta = (c_1..c_r, a_1 in R^{d+1}, ..., a_r in R^{d+1});
        # coefficient of t^alpha in <a, (1,t)>^m is the multinomial
        # m! / ((m-|alpha|)! prod alpha_i!) times a_0^{m-|alpha|} a^alpha.
        terms = []
        for j in range(rank):
            a_off = rank + j * (d + 1)
            for alpha, out in index_of.items():
                rem = m - sum(alpha)
                mult = factorial(m) // (factorial(rem) * int(np.prod([factorial(v) for v in alpha])))
                powers = {j: 1}
                if rem > 0:
                    powers[a_off] = rem
                for i, v in enumerate(alpha):
                    if v > 0:
                        powers[a_off + 1 + i] = v
                terms.append((out, float(mult), powers))
        param_dim = rank * (d + 2)
        pmap = PolynomialMap(param_dim, ambient, terms)
        intrinsic = _probe_jacobian_rank(pmap)
        return ParametricVariety(
            name=f"waring(d={d},m={m},r={rank})", ambient_dim=ambient,
            param_dim=param_dim, intrinsic_dim=intrinsic,
            gauge_dim=param_dim - intrinsic, pmap=pmap,
        )

    raise ValueError(f"unknown polynomial model {model!r}")


class ImplicitPlaneCurve:
    """Plane curve f(x1, x2) = 0 with a dense coefficient table.

    ``coeffs[i, j]`` multiplies ``x1^i x2^j``; entries with ``i + j``
    above the total degree are zero.  The homogenization table
    ``homogenization[a, i, j]`` multiplies ``x0^a x1^i x2^j`` with
    ``a = degree - i - j``.
    """

    def __init__(self, coeffs, name: str = ""):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.ndim != 2:
            raise ValueError("coefficient table must be 2-dimensional")
        if not np.any(coeffs):
            raise ValueError("curve polynomial is identically zero")
        degree = int(max(i + j for i, j in zip(*np.nonzero(coeffs))))
        table = np.zeros((degree + 1, degree + 1))
        for i, j in zip(*np.nonzero(coeffs)):
            if i + j > degree:
                raise ValueError("inconsistent coefficient table")
            table[i, j] = coeffs[i, j]
        self.coeffs = table
        self.degree = degree
        self.name = name or "curve"

        hom = np.zeros((degree + 1,) * 3)
        for i, j in zip(*np.nonzero(table)):
            hom[degree - i - j, i, j] = table[i, j]
        self.homogenization = hom

    def __call__(self, x1, x2):
        """Evaluate f; accepts real or complex scalars and arrays."""
        x1 = np.asarray(x1)
        x2 = np.asarray(x2)
        total = np.zeros(np.broadcast(x1, x2).shape, dtype=np.result_type(x1, x2, float))
        for i, j in zip(*np.nonzero(self.coeffs)):
            total = total + self.coeffs[i, j] * x1 ** i * x2 ** j
        if total.ndim == 0:
            return total[()]
        return total

    def grad(self, x1, x2):
        """(df/dx1, df/dx2) at a point."""
        g1 = 0.0
        g2 = 0.0
        for i, j in zip(*np.nonzero(self.coeffs)):
            c = self.coeffs[i, j]
            if i > 0:
                g1 += c * i * x1 ** (i - 1) * x2 ** j
            if j > 0:
                g2 += c * j * x1 ** i * x2 ** (j - 1)
        return g1, g2

    def x2_section(self, x1):
        """Coefficients (ascending in x2) of the univariate slice f(x1, .)."""
        x1 = complex(x1) if np.iscomplexobj(np.asarray(x1)) else float(x1)
        n = self.coeffs.shape[1]
        out = np.zeros(n, dtype=complex)
        for j in range(n):
            col = self.coeffs[:, j]
            out[j] = sum(col[i] * x1 ** i for i in np.nonzero(col)[0])
        return out

    def __repr__(self):
        return f"ImplicitPlaneCurve({self.name}, degree={self.degree})"


def make_cubic(lam: float) -> ImplicitPlaneCurve:
    """The cubic x2^2 = x1 (x1 - 1)(x1 - lam); lam must avoid 0 and 1.

    At lam in {0, 1} the curve degenerates to a singular cubic, which the
    degree and inflection computations here do not cover.
    """
    lam = float(lam)
    if lam == 0.0 or lam == 1.0:
        raise ValueError("lambda must differ from 0 and 1")
    coeffs = np.zeros((4, 4))
    # x2^2 - (x1^3 - (1+lam) x1^2 + lam x1)
    coeffs[0, 2] = 1.0
    coeffs[3, 0] = -1.0
    coeffs[2, 0] = 1.0 + lam
    coeffs[1, 0] = -lam
    return ImplicitPlaneCurve(coeffs, name=f"cubic(lambda={lam:g})")


def make_circle(radius: float = 1.0) -> ImplicitPlaneCurve:
    """x1^2 + x2^2 - radius^2 = 0."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    coeffs = np.zeros((3, 3))
    coeffs[2, 0] = 1.0
    coeffs[0, 2] = 1.0
    coeffs[0, 0] = -radius ** 2
    return ImplicitPlaneCurve(coeffs, name=f"circle(r={radius:g})")


def make_parabola_implicit() -> ImplicitPlaneCurve:
    """The parabola as an implicit curve, x2 - x1^2 = 0."""
    coeffs = np.zeros((3, 3))
    coeffs[0, 1] = 1.0
    coeffs[2, 0] = -1.0
    return ImplicitPlaneCurve(coeffs, name="parabola")

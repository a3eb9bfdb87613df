"""Measurement families: samplers of linear functionals on the ambient space.

Functionals are stored densely as coefficient vectors acting by dot
product on flattened ambient vectors, even when structured (rank-one,
single entry); ambient dimensions here are small and a uniform
representation keeps the solver simple.  Each family carries metadata
flags for the two hypotheses that matter for identifiability: whether
its closure is irreducible and whether it spans the dual space.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatchError
from .numerics import numerical_rank
from .polymap import coefficient_space_dim, monomial_exponents


@dataclass(frozen=True)
class LinearFunctional:
    """A functional ell in V*, acting as x -> dot(coeffs, x)."""

    coeffs: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        if self.coeffs.ndim != 1:
            raise ValueError("functional coefficients must be a vector")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("functional coefficients must be finite")
        if not np.any(self.coeffs):
            raise ValueError("functional must be nonzero")

    def __call__(self, x):
        return float(np.dot(self.coeffs, np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class MeasurementFamily:
    """A sampler of functionals plus irreducibility/nondegeneracy metadata."""

    name: str
    ambient_dim: int
    sampler: Callable[[np.random.Generator], LinearFunctional] = field(repr=False)
    irreducible: bool = True
    nondegenerate: bool = True

    def sample(self, rng) -> LinearFunctional:
        ell = self.sampler(rng)
        if ell.coeffs.shape != (self.ambient_dim,):
            raise DimensionMismatchError(
                f"{self.name}: sampler emitted length {ell.coeffs.shape[0]}, "
                f"expected {self.ambient_dim}"
            )
        return ell

    def sample_many(self, count: int, rng) -> list[LinearFunctional]:
        return [self.sample(rng) for _ in range(count)]


@dataclass(frozen=True)
class MeasurementSystem:
    """Functionals ell_1..ell_m with their observed values y_1..y_m."""

    functionals: tuple
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "functionals", tuple(self.functionals))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if len(self.functionals) != len(self.values):
            raise DimensionMismatchError("functional/value count mismatch")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("measurement values must be finite")

    def __len__(self):
        return len(self.functionals)

    def coeff_matrix(self) -> np.ndarray:
        return np.stack([f.coeffs for f in self.functionals])

    def prefix(self, m: int) -> "MeasurementSystem":
        return MeasurementSystem(self.functionals[:m], self.values[:m])

    def to_jsonable(self):
        return [
            {
                "coeffs": f.coeffs.tolist(),
                "provenance": f.provenance,
                "value": float(y),
            }
            for f, y in zip(self.functionals, self.values)
        ]


def system_from_jsonable(items) -> MeasurementSystem:
    functionals = [LinearFunctional(np.asarray(it["coeffs"]), dict(it.get("provenance", {})))
                   for it in items]
    values = [it["value"] for it in items]
    return MeasurementSystem(tuple(functionals), np.asarray(values, dtype=float))


def measure_all(x, functionals) -> MeasurementSystem:
    """Apply the functionals to an ambient point, producing y_i = ell_i(x)."""
    x = np.asarray(x, dtype=float)
    functionals = tuple(functionals)
    for f in functionals:
        if f.coeffs.shape != x.shape:
            raise DimensionMismatchError(
                f"functional of length {f.coeffs.shape[0]} applied to point of "
                f"length {x.shape[0]}"
            )
    values = np.array([np.dot(f.coeffs, x) for f in functionals])
    return MeasurementSystem(functionals, values)


def gaussian_family(ambient_dim: int) -> MeasurementFamily:
    """Dense functionals with independent standard-normal coefficients."""
    if ambient_dim < 1:
        raise ValueError("ambient_dim must be positive")

    def sampler(rng):
        coeffs = rng.standard_normal(ambient_dim)
        return LinearFunctional(coeffs, {"family": "gaussian"})

    return MeasurementFamily("gaussian", ambient_dim, sampler,
                             irreducible=True, nondegenerate=True)


def rank_one_family(d1: int, d2: int, normalize: bool = True) -> MeasurementFamily:
    """Bilinear functionals A -> xi^T A eta, stored as flattened xi (x) eta."""
    if d1 < 1 or d2 < 1:
        raise ValueError("d1 and d2 must be positive")

    def sampler(rng):
        xi = rng.standard_normal(d1)
        eta = rng.standard_normal(d2)
        if normalize:
            xi = xi / np.linalg.norm(xi)
            eta = eta / np.linalg.norm(eta)
        coeffs = np.outer(xi, eta).ravel()
        return LinearFunctional(coeffs, {
            "family": "rank_one", "xi": xi.tolist(), "eta": eta.tolist(),
        })

    return MeasurementFamily(f"rank_one({d1}x{d2})", d1 * d2, sampler,
                             irreducible=True, nondegenerate=True)


def rank_one_functional(xi, eta) -> LinearFunctional:
    """The functional A -> xi^T A eta for explicit xi, eta."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return LinearFunctional(np.outer(xi, eta).ravel(), {
        "family": "rank_one", "xi": xi.tolist(), "eta": eta.tolist(),
    })


def entry_family(d1: int, d2: int) -> MeasurementFamily:
    """Single-entry functionals A -> a_{mu,nu} with uniformly random (mu, nu).

    The available functionals form a finite set, so the family is not
    irreducible; the (n+1)-measurements identifiability guarantee does
    not cover it even though the entries jointly span the dual space.
    """
    if d1 < 1 or d2 < 1:
        raise ValueError("d1 and d2 must be positive")

    def sampler(rng):
        mu = int(rng.integers(d1))
        nu = int(rng.integers(d2))
        return entry_functional(d1, d2, mu, nu)

    return MeasurementFamily(f"entry({d1}x{d2})", d1 * d2, sampler,
                             irreducible=False, nondegenerate=True)


def entry_functional(d1: int, d2: int, mu: int, nu: int) -> LinearFunctional:
    """The functional picking out matrix entry (mu, nu), zero-based."""
    if not (0 <= mu < d1 and 0 <= nu < d2):
        raise ValueError(f"entry index ({mu},{nu}) out of range for {d1}x{d2}")
    coeffs = np.zeros(d1 * d2)
    coeffs[mu * d2 + nu] = 1.0
    return LinearFunctional(coeffs, {"family": "entry", "mu": mu, "nu": nu})


def evaluation_coeffs(point, max_degree: int, lifted: bool = True) -> np.ndarray:
    """Monomials of the point in graded-lex order (the Veronese image)."""
    point = np.atleast_1d(np.asarray(point, dtype=float))
    exps = monomial_exponents(point.shape[0], max_degree, lifted=lifted)
    return np.array([np.prod(point ** np.asarray(e)) for e in exps])


def evaluation_family(d: int, m: int, lifted: bool = True) -> MeasurementFamily:
    """Point-evaluation functionals p -> p(xi) on d-variate polynomials.

    Coefficient vectors enumerate the monomial values at xi in the fixed
    graded-lexicographic order: all degrees <= m when lifted, only
    degree-m monomials otherwise.
    """
    if d < 1 or m < 1:
        raise ValueError("d and m must be positive")
    ambient = coefficient_space_dim(d, m, lifted=lifted)

    def sampler(rng):
        xi = rng.standard_normal(d)
        return LinearFunctional(evaluation_coeffs(xi, m, lifted=lifted), {
            "family": "evaluation", "point": xi.tolist(), "lifted": lifted,
        })

    return MeasurementFamily(f"evaluation(d={d},m={m})", ambient, sampler,
                             irreducible=True, nondegenerate=True)


def _monomial_basis(size: int):
    if size < 1:
        raise ValueError("basis must have at least one function")
    return lambda t: np.array([t ** mu for mu in range(size)], dtype=float)


def _tabulated_basis(grid, values):
    grid = np.asarray(grid, dtype=float)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[1] != grid.shape[0]:
        raise ValueError("each tabulated basis function needs one value per grid node")
    return lambda t: np.array([np.interp(t, grid, row) for row in values])


def _build_axis_bases(basis_specs):
    evaluators = []
    sizes = []
    for spec in basis_specs:
        kind = spec.get("kind", "monomial")
        if kind == "monomial":
            size = int(spec["size"])
            evaluators.append(_monomial_basis(size))
            sizes.append(size)
        elif kind == "tabulated":
            fn = _tabulated_basis(spec["grid"], spec["values"])
            evaluators.append(fn)
            sizes.append(len(spec["values"]))
        else:
            raise ValueError(f"unknown basis kind {kind!r}")
    return evaluators, sizes


def tensor_feature_coeffs(basis_specs, point) -> np.ndarray:
    """Flattened rank-one tensor of per-axis basis values at the point."""
    evaluators, _ = _build_axis_bases(list(basis_specs))
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if len(point) != len(evaluators):
        raise DimensionMismatchError("one coordinate per axis basis required")
    vecs = [ev(t) for ev, t in zip(evaluators, point)]
    out = vecs[0]
    for v in vecs[1:]:
        out = np.multiply.outer(out, v)
    return out.ravel()


def tensor_feature_family(basis_specs, box=(-1.0, 1.0)) -> MeasurementFamily:
    """Rank-one feature functionals from a tensor-product function basis.

    ``basis_specs`` gives one spec per axis: either ``{"kind":
    "monomial", "size": m}`` (basis t^0..t^{m-1}) or ``{"kind":
    "tabulated", "grid": [...], "values": [[...], ...]}`` (piecewise
    linear interpolation of tabulated basis functions).  The sampler
    draws the evaluation point uniformly from ``box`` on each axis and
    emits the flattened outer product of the per-axis basis values.
    """
    basis_specs = list(basis_specs)
    if not basis_specs:
        raise ValueError("need at least one axis basis")
    evaluators, sizes = _build_axis_bases(basis_specs)
    lo, hi = float(box[0]), float(box[1])
    if not lo < hi:
        raise ValueError("sampling box must have positive width")
    ambient = int(np.prod(sizes))

    def sampler(rng):
        point = rng.uniform(lo, hi, size=len(evaluators))
        vecs = [ev(t) for ev, t in zip(evaluators, point)]
        out = vecs[0]
        for v in vecs[1:]:
            out = np.multiply.outer(out, v)
        return LinearFunctional(out.ravel(), {
            "family": "tensor_feature", "point": point.tolist(),
        })

    return MeasurementFamily(f"tensor_feature({'x'.join(map(str, sizes))})",
                             ambient, sampler, irreducible=True, nondegenerate=True)


def line_family(direction) -> MeasurementFamily:
    """All scalar multiples of one fixed functional.

    Irreducible (a line through the origin of the dual space) but
    contained in a hyperplane, so it fails the nondegeneracy hypothesis.
    """
    direction = np.asarray(direction, dtype=float)
    if direction.ndim != 1 or not np.any(direction):
        raise ValueError("direction must be a nonzero vector")

    def sampler(rng):
        alpha = rng.standard_normal()
        while alpha == 0.0:
            alpha = rng.standard_normal()
        return LinearFunctional(alpha * direction, {
            "family": "line", "alpha": float(alpha),
        })

    return MeasurementFamily("line", direction.shape[0], sampler,
                             irreducible=True, nondegenerate=False)


def nondegeneracy_rank(family: MeasurementFamily, num_samples: int, rng) -> int:
    """Numerical rank of a num_samples x ambient_dim matrix of sampled coeffs.

    Equals ambient_dim exactly when the sampled functionals span the dual
    space, the empirical surrogate for "not contained in a hyperplane".
    """
    rows = np.stack([family.sample(rng).coeffs for _ in range(num_samples)])
    return numerical_rank(rows)

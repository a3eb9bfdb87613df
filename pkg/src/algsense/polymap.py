"""Sparse term-table polynomial maps R^p -> R^a.

Every model parametrization in this package (outer products of factor
matrices, monomial coefficient maps, powers of lifted linear forms) is a
polynomial map, so all of them share one representation: a flat list of
monomial terms.  Term ``t`` contributes ``coeff[t] * prod_l
theta[var_idx[l]] ** var_exp[l]`` (``l`` ranging over the CSR segment
``term_ptr[t]:term_ptr[t+1]``) to output coordinate ``out_idx[t]``.

The Jacobian of a term table is itself a term table (over ``a * p``
flattened outputs), built once at construction, so evaluation and
differentiation go through the same kernel.  The kernel runs either as a
numba-compiled loop or as a vectorized numpy computation, depending on
the active backend.
"""

from itertools import combinations_with_replacement
from math import comb

import numpy as np

from .backend import NUMBA_ENABLED, jit
from .errors import DimensionMismatchError


def _eval_terms(theta, out_dim, coeff, out_idx, term_ptr, var_idx, var_exp):
    out = np.zeros(out_dim)
    for t in range(coeff.shape[0]):
        v = coeff[t]
        for l in range(term_ptr[t], term_ptr[t + 1]):
            v *= theta[var_idx[l]] ** var_exp[l]
        out[out_idx[t]] += v
    return out


_eval_terms_jit = jit(_eval_terms)


class PolynomialMap:
    """Polynomial map given as a list of terms ``(out_index, coeff, {var: exp})``."""

    def __init__(self, param_dim: int, out_dim: int, terms):
        self.param_dim = int(param_dim)
        self.out_dim = int(out_dim)

        coeff, out_idx, ptr, vidx, vexp = [], [], [0], [], []
        for out, c, powers in terms:
            if not 0 <= out < out_dim:
                raise ValueError(f"term output index {out} out of range")
            coeff.append(float(c))
            out_idx.append(int(out))
            if powers:
                for j, e in sorted(powers.items()):
                    if not 0 <= j < param_dim:
                        raise ValueError(f"term variable index {j} out of range")
                    if e < 0:
                        raise ValueError("negative exponent")
                    vidx.append(int(j))
                    vexp.append(int(e))
            else:
                # keep CSR segments non-empty so reduceat stays valid
                vidx.append(0)
                vexp.append(0)
            ptr.append(len(vidx))

        self.coeff = np.asarray(coeff, dtype=np.float64)
        self.out_idx = np.asarray(out_idx, dtype=np.int64)
        self.term_ptr = np.asarray(ptr, dtype=np.int64)
        self.var_idx = np.asarray(vidx, dtype=np.int64)
        self.var_exp = np.asarray(vexp, dtype=np.int64)

        scatter = np.zeros((len(coeff), out_dim))
        scatter[np.arange(len(coeff)), self.out_idx] = self.coeff
        self._scatter = scatter

        self._deriv = None

    @property
    def num_terms(self) -> int:
        return self.coeff.shape[0]

    def terms(self):
        """Iterate ``(out_index, coeff, {var: exp})`` triples."""
        for t in range(self.num_terms):
            powers = {}
            for l in range(self.term_ptr[t], self.term_ptr[t + 1]):
                if self.var_exp[l] > 0:
                    powers[int(self.var_idx[l])] = int(self.var_exp[l])
            yield int(self.out_idx[t]), float(self.coeff[t]), powers

    @property
    def derivative(self) -> "PolynomialMap":
        """Jacobian as a term table over ``out_dim * param_dim`` flat outputs."""
        if self._deriv is None:
            p = self.param_dim
            dterms = []
            for out, c, powers in self.terms():
                for j, e in powers.items():
                    dp = dict(powers)
                    if e == 1:
                        del dp[j]
                    else:
                        dp[j] = e - 1
                    dterms.append((out * p + j, c * e, dp))
            self._deriv = PolynomialMap(p, self.out_dim * p, dterms)
        return self._deriv

    def _check_theta(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape[-1] != self.param_dim:
            raise DimensionMismatchError(
                f"expected {self.param_dim} parameters, got {theta.shape[-1]}"
            )
        return theta

    def __call__(self, theta):
        theta = self._check_theta(theta)
        if theta.ndim != 1:
            raise DimensionMismatchError("expected a single parameter vector")
        if NUMBA_ENABLED:
            return _eval_terms_jit(
                theta, self.out_dim, self.coeff, self.out_idx,
                self.term_ptr, self.var_idx, self.var_exp,
            )
        return self.eval_batch(theta[None, :])[0]

    def jac(self, theta):
        theta = self._check_theta(theta)
        d = self.derivative
        if NUMBA_ENABLED:
            flat = _eval_terms_jit(
                theta, d.out_dim, d.coeff, d.out_idx,
                d.term_ptr, d.var_idx, d.var_exp,
            )
        else:
            flat = d.eval_batch(theta[None, :])[0]
        return flat.reshape(self.out_dim, self.param_dim)

    def eval_batch(self, thetas):
        """Evaluate at a batch of parameter vectors, shape (s, param_dim)."""
        thetas = self._check_theta(thetas)
        vals = thetas[:, self.var_idx] ** self.var_exp
        term_vals = np.multiply.reduceat(vals, self.term_ptr[:-1], axis=1)
        return term_vals @ self._scatter

    def jac_batch(self, thetas):
        flat = self.derivative.eval_batch(thetas)
        return flat.reshape(len(flat), self.out_dim, self.param_dim)


def monomial_exponents(num_vars: int, max_degree: int, lifted: bool = True):
    """Exponent tuples in graded lexicographic order.

    Degrees ascend; within a degree, tuples are ordered lexicographically
    with the first variable dominant (for two variables of degree 2:
    ``t1^2, t1 t2, t2^2``).  ``lifted=False`` keeps only the top degree.
    This fixed order defines the coefficient-space coordinates used by
    both the polynomial models and the evaluation functionals.
    """
    degrees = range(max_degree + 1) if lifted else [max_degree]
    exps = []
    for deg in degrees:
        level = set()
        for picks in combinations_with_replacement(range(num_vars), deg):
            e = [0] * num_vars
            for j in picks:
                e[j] += 1
            level.add(tuple(e))
        exps.extend(sorted(level, reverse=True))
    return exps


def coefficient_space_dim(num_vars: int, max_degree: int, lifted: bool = True) -> int:
    if lifted:
        return comb(max_degree + num_vars, num_vars)
    return comb(max_degree + num_vars - 1, num_vars - 1)

"""Small shared numerical utilities."""

import numpy as np

# Singular values below RANK_REL_TOL times the largest one do not count
# toward the numerical rank.  Configurable per call for ill-conditioned
# models.
RANK_REL_TOL = 1e-8


def numerical_rank(matrix, rel_tol: float = RANK_REL_TOL) -> int:
    """Rank of ``matrix`` counting singular values > rel_tol * s_max."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))

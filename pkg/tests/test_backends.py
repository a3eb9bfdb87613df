"""Cross-checks between the numba kernel path and the vectorized numpy path."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from algsense import (
    SolverOptions,
    backend,
    enumerate_fiber,
    gaussian_family,
    make_low_rank,
    make_parabola,
    measure_all,
    random_point,
    rank_one_family,
)
from algsense.fiber import _lm_multistart, _lm_multistart_numpy, _run_multistart


def _problem(seed=50):
    v = make_low_rank(2, 2, 1)
    rng = np.random.default_rng(seed)
    theta, x = random_point(v, rng)
    sys_ = measure_all(x, rank_one_family(2, 2).sample_many(4, rng))
    starts = np.random.default_rng(seed + 1).standard_normal((40, 4)) * 2.0
    return v, sys_, starts


def test_python_loop_and_numpy_batch_agree():
    v, sys_, starts = _problem()
    L = sys_.coeff_matrix()
    y = sys_.values
    pmap = v.pmap
    d = pmap.derivative
    tol_abs = 1e-10 * (1 + np.linalg.norm(y))
    # undecorated per-start loop (reference semantics)
    t1, ok1, rn1, it1 = _lm_multistart(
        starts, L, y, pmap.out_dim,
        pmap.coeff, pmap.out_idx, pmap.term_ptr, pmap.var_idx, pmap.var_exp,
        d.coeff, d.out_idx, d.term_ptr, d.var_idx, d.var_exp,
        200, tol_abs, 1e-3)
    t2, ok2, rn2, it2 = _lm_multistart_numpy(starts, L, y, pmap, 200, tol_abs, 1e-3)
    np.testing.assert_array_equal(ok1, ok2)
    np.testing.assert_array_equal(it1, it2)
    # parameters may drift along the flat gauge direction at roundoff
    # level; the ambient solutions must coincide
    amb1 = np.stack([v.eval(t) for t in t1])
    amb2 = np.stack([v.eval(t) for t in t2])
    np.testing.assert_allclose(amb1, amb2, rtol=1e-8, atol=1e-8)
    np.testing.assert_allclose(rn1, rn2, rtol=1e-5, atol=1e-11)


def test_active_backend_matches_dispatch():
    v, sys_, starts = _problem(seed=60)
    opts = SolverOptions()
    thetas, ok, rn, _ = _run_multistart(v.pmap, sys_.coeff_matrix(), sys_.values,
                                        starts, opts)
    # whatever the backend, results satisfy the convergence contract
    tol_abs = opts.residual_tol * (1 + np.linalg.norm(sys_.values))
    L = sys_.coeff_matrix()
    for i in np.nonzero(ok)[0]:
        r = L @ v.eval(thetas[i]) - sys_.values
        assert np.linalg.norm(r) <= tol_abs


@pytest.mark.skipif(not backend.NUMBA_ENABLED,
                    reason="needs the numba backend active to compare against numpy")
def test_numpy_env_flag_reproduces_fiber(tmp_path):
    script = r"""
import json
import numpy as np
from algsense import (enumerate_fiber, gaussian_family, make_parabola,
                      measure_all, backend)
v = make_parabola()
x = np.array([1.0, 1.0])
rng = np.random.default_rng(70)
sys_ = measure_all(x, gaussian_family(2).sample_many(1, rng))
fib = enumerate_fiber(v, sys_, target_theta=np.array([1.0]), target_point=x,
                      rng=np.random.default_rng(71))
print(json.dumps({
    "backend": backend.active_backend(),
    "points": [[round(float(c), 9) for c in p] for p in fib.points],
    "basins": fib.basin_counts.tolist(),
}))
"""
    results = {}
    for flag in ("numba", "numpy"):
        env = dict(os.environ, ALGSENSE_BACKEND=flag)
        out = subprocess.run([sys.executable, "-c", script], env=env,
                             capture_output=True, text=True, check=True)
        results[flag] = json.loads(out.stdout)
    assert results["numba"]["backend"] == "numba"
    assert results["numpy"]["backend"] == "numpy"
    assert results["numba"]["points"] == results["numpy"]["points"]
    assert results["numba"]["basins"] == results["numpy"]["basins"]

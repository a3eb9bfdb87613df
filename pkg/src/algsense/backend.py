"""Kernel backend selection.

Hot numerical kernels (term-table evaluation, the multi-start damped
least-squares loop) exist in two flavors: numba-compiled loops and a
vectorized pure-numpy path.  The active backend is chosen once at import
time from the environment variable ``ALGSENSE_BACKEND``:

* ``numba`` (default when numba imports cleanly): loop kernels are
  compiled with ``numba.njit(cache=True)``.
* ``numpy``: no compilation; the vectorized numpy implementations run.

Both paths implement the same update rules, so results agree to floating
point roundoff; see ``benchmarks/bench_backends.py`` for a speed
comparison.
"""

import os

_requested = os.environ.get("ALGSENSE_BACKEND", "").strip().lower()

if _requested in ("numpy", "python"):
    NUMBA_ENABLED = False
elif _requested in ("", "numba"):
    try:
        import numba  # noqa: F401
        NUMBA_ENABLED = True
    except ImportError:
        if _requested == "numba":
            raise
        NUMBA_ENABLED = False
else:
    raise ValueError(
        f"ALGSENSE_BACKEND={_requested!r} not understood; use 'numba' or 'numpy'"
    )


def active_backend() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


def jit(func):
    """Compile ``func`` with numba when the numba backend is active."""
    if NUMBA_ENABLED:
        import numba

        return numba.njit(cache=True, nogil=True)(func)
    return func

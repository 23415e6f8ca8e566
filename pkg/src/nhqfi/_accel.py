"""Optional numba acceleration.

Hot kernels (tridiagonal QL iteration, pivoted tridiagonal solves) are written
as plain numpy/python loops and jitted with numba when available.  Setting the
environment variable ``NHQFI_NO_NUMBA=1`` selects the pure-python fallback,
which produces bit-identical results (same code path, no jit).
"""

import os

_DISABLE = os.environ.get("NHQFI_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLE:
        raise ImportError("numba disabled via NHQFI_NO_NUMBA")
    from numba import njit as _njit
    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False

    def _njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, identity decorator otherwise."""
    return _njit(*args, **kwargs)

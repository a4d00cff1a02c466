"""Selection between numba-compiled kernels and the pure-numpy fallback.

Set ``QBMZENO_DISABLE_JIT=1`` before import to force the numpy path.
When numba is not importable the numpy path is used regardless.
"""
import os

_FLAG = os.environ.get("QBMZENO_DISABLE_JIT", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_JIT = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap

"""Backend selection for the hot numeric kernels.

Set ``QSTDARK_DISABLE_NUMBA=1`` to force the pure-numpy code paths, e.g. for
debugging or on platforms without a working numba install.
"""
import os

_FLAG = os.environ.get("QSTDARK_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

USE_NUMBA = numba is not None and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` with caching, or a no-op decorator when numba is off."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    if numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"

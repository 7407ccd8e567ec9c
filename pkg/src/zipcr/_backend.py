"""Select between numba-compiled kernels and the pure-numpy fallback.

Set ``ZIPCR_DISABLE_NUMBA=1`` in the environment (before import) to force the
numpy path even when numba is installed.
"""
import os

_FLAG = os.environ.get("ZIPCR_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("numba disabled by ZIPCR_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # bare @njit and @njit(...) both become no-ops
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda func: func


def backend_name():
    return "numba" if HAS_NUMBA else "numpy"

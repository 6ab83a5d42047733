"""Numba switch.

Kernels are written once as plain Python/numpy and compiled with ``numba.njit``
when numba is importable and ``SQMETRICS_NO_NUMBA`` is unset (or ``0``).
"""
import os

_FLAG = os.environ.get("SQMETRICS_NO_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional speedup
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and _FLAG in ("", "0", "false", "no")


def jit(fn):
    """Compile ``fn`` in nopython mode, or return ``None`` without numba."""
    if not NUMBA_AVAILABLE:
        return None
    return numba.njit(cache=True)(fn)

"""Optional numba acceleration.

Kernels are written in the subset of Python/numpy that numba compiles in
nopython mode.  Setting ``MGRIEMANN_NUMBA=0`` (or running without numba
installed) leaves them as ordinary numpy functions.
"""

import os

_FLAG = os.environ.get("MGRIEMANN_NUMBA", "1").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is an optional accelerator
    _numba = None

USE_NUMBA = _numba is not None and _FLAG not in ("0", "false", "off", "no")


def njit(fn):
    """Compile ``fn`` with numba when enabled, otherwise return it untouched."""
    if USE_NUMBA:
        # numpy float semantics (inf / nan instead of ZeroDivisionError), so
        # that both back ends agree on degenerate inputs
        return _numba.njit(cache=True, nogil=True, error_model="numpy")(fn)
    return fn


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"

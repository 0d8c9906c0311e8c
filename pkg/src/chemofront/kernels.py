"""Kernel backend selection.

The compiled extension is preferred; setting ``CHEMOFRONT_PURE_PYTHON=1``
forces the NumPy fallback. ``BACKEND`` names the active implementation.
"""

import os

from . import _pykernels

if os.environ.get("CHEMOFRONT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

solve_tridiagonal = _impl.solve_tridiagonal
upwind_divergence = _impl.upwind_divergence
logistic_rk4 = _impl.logistic_rk4


def available_backends():
    """Map backend name to kernel module for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out

"""Kernel backend selection.

The compiled extension is used when present; otherwise the pure-NumPy
fallback takes over. Set ``INFRALIDAR_PURE_PYTHON=1`` to force the fallback
(used by the benchmark and the backend-equivalence tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("INFRALIDAR_PURE_PYTHON", "0") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

bvh_cast = _impl.bvh_cast


def active_backend() -> str:
    """Name of the kernel backend in use: 'cython' or 'python'."""
    return _impl.BACKEND_NAME

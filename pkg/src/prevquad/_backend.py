"""Kernel backend selection.

The compiled extension is preferred when importable; the NumPy fallback is
otherwise used transparently. Set ``PREVQUAD_BACKEND=python`` to force the
fallback (useful for benchmarking and cross-checking).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PREVQUAD_BACKEND", "").lower() == "python":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _compiled

        kernels = _compiled
        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"


def backend_name() -> str:
    """Name of the kernel backend in use: ``"compiled"`` or ``"python"``."""
    return BACKEND

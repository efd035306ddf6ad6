"""Backend selection for the hot kernels.

The Cython extension accelerates the sequential recursions (GARCH and AR
filters, ~80x over the Python loops); the Bartlett long-run variance
kernels stay on the vectorized NumPy implementation, which benchmarks
faster than naive compiled loops (``benchmarks/bench_kernels.py`` has the
numbers).  Set ``TSDID_PURE_PYTHON=1`` to force the pure fallback for
everything.
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCED_PURE = os.environ.get("TSDID_PURE_PYTHON", "").strip() in {"1", "true", "yes"}

if _FORCED_PURE:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

garch_filter = _impl.garch_filter
ar1_filter = _impl.ar1_filter
bartlett_lrv = _kernels_py.bartlett_lrv
bartlett_lrv_matrix = _kernels_py.bartlett_lrv_matrix


def backend_name() -> str:
    """Name of the active recursion backend ('cython' or 'python')."""
    return BACKEND

"""Kernel dispatch: use the compiled extension when available.

Set CFKNN_FORCE_PYTHON=1 to force the numpy fallback (used by the benchmark
and to debug suspected kernel mismatches).
"""

import os

from . import _npkernels

if os.environ.get("CFKNN_FORCE_PYTHON") == "1":
    _impl = _npkernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _npkernels
        BACKEND = "python"

neighbor_mean = _impl.neighbor_mean
sq_dists_to = _impl.sq_dists_to

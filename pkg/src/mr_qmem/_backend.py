"""Select compiled kernels when available.

Set ``MR_QMEM_PURE=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("MR_QMEM_PURE"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
kernels = _compiled if _compiled is not None else _kernels_py
python_kernels = _kernels_py
compiled_kernels = _compiled

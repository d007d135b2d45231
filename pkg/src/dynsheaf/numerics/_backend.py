"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``DYNSHEAF_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("DYNSHEAF_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

aberth = _impl.aberth
horner = _impl.horner

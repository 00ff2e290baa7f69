"""Select the compiled kernel if it was built, else the numpy fallback.

Set ``QGEOM_PURE_PYTHON=1`` to force the fallback.
"""
import os

from qgeom import _fallback

if os.environ.get("QGEOM_PURE_PYTHON") == "1":
    kernels = _fallback
    BACKEND = "python"
else:
    try:
        from qgeom import _kernels as kernels
    except ImportError:
        kernels = _fallback
        BACKEND = "python"
    else:
        BACKEND = "cython"

__all__ = ["kernels", "BACKEND"]

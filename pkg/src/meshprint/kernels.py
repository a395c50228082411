"""Dispatch to the compiled kernels when they are built, else the Python ones.

Set ``MESHPRINT_PURE_PYTHON=1`` before import to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("MESHPRINT_PURE_PYTHON") == "1":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

slice_facets = _impl.slice_facets
first_crossing = _impl.first_crossing

__all__ = ["BACKEND", "slice_facets", "first_crossing"]

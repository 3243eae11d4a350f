"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``SCIBRIDGES_PURE_PYTHON=1`` to force the numpy path.
"""

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("SCIBRIDGES_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

neighbor_offsets = _kernels_py.neighbor_offsets


def label_components(mask, connectivity=26):
    if connectivity not in (6, 18, 26):
        raise ValueError(f"connectivity must be 6, 18 or 26, got {connectivity}")
    return _impl.label_components(mask, connectivity)


def bridge_row_counts(sc, lesion):
    return _impl.bridge_row_counts(sc, lesion)

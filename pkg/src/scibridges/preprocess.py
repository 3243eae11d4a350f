"""Image preparation: reorientation, resampling, z-scoring, binarization."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .errors import DegenerateInputError, ValidationError
from .volume import BinaryMask, Volume3D, reorient

__all__ = ["DEFAULT_SPACING", "resample", "zscore_normalize", "binarize", "reorient"]

# median training-set resolution, R-L / A-P / I-S order
DEFAULT_SPACING = (0.92, 0.68, 0.92)


def _output_dims(dims, spacing, target):
    out = []
    for n, s, t in zip(dims, spacing, target):
        extent = n * s / t
        # guard against 64.0000000001 -> 65 from float noise
        out.append(max(1, math.ceil(extent - 1e-9 * max(1.0, extent))))
    return tuple(out)


def resample(vol: Volume3D, target_spacing, mode: str = "linear") -> Volume3D:
    """Resample onto a grid with ``target_spacing`` mm voxels.

    The first voxel keeps its physical position. Output dims are
    ``ceil(dims * spacing / target_spacing)``; samples falling past the last
    input voxel centre take the edge value. ``mode="nearest"`` is meant for
    masks and returns a :class:`BinaryMask` when given one.
    """
    target = tuple(float(t) for t in target_spacing)
    if len(target) != 3 or any(not t > 0 for t in target):
        raise ValidationError(f"target spacing must be three positive values, got {target_spacing}")
    if mode not in ("linear", "nearest"):
        raise ValidationError(f"resampling mode must be 'linear' or 'nearest', got {mode!r}")

    spacing = np.asarray(vol.spacing)
    zoom = np.asarray(target) / spacing  # input voxels per output voxel
    out_dims = _output_dims(vol.dims, vol.spacing, target)

    affine = vol.affine.copy()
    affine[:3, :3] = vol.affine[:3, :3] * zoom[np.newaxis, :]

    if out_dims == vol.dims and np.allclose(zoom, 1.0, rtol=0, atol=1e-12):
        return type(vol)(vol.data.copy(), affine)

    if mode == "nearest":
        # floor(x + 0.5) rather than ndimage's round-half-even
        coords = [
            np.clip(np.floor(np.arange(n) * z + 0.5).astype(np.intp), 0, m - 1)
            for n, z, m in zip(out_dims, zoom, vol.dims)
        ]
        data = vol.data[np.ix_(*coords)]
        return type(vol)(np.ascontiguousarray(data), affine)

    src = vol.data
    if not np.issubdtype(src.dtype, np.floating):
        src = src.astype(np.float64)
    data = ndimage.affine_transform(
        src,
        np.diag(zoom),
        output_shape=out_dims,
        order=1,
        mode="nearest",
        prefilter=False,
    )
    return Volume3D(data, affine)


def zscore_normalize(vol: Volume3D) -> Volume3D:
    """(v - mean) / std over all voxels, population std, float64 output."""
    data = np.asarray(vol.data, dtype=np.float64)
    if data.size < 2:
        raise ValidationError("z-score normalization needs at least 2 voxels")
    mean = data.mean()
    centered = data - mean
    std = math.sqrt(float(np.mean(centered * centered)))
    if std == 0.0 or not math.isfinite(std):
        raise DegenerateInputError("cannot z-score a constant volume (std = 0)")
    out = centered / std
    # second pass removes the residual rounding drift of large volumes
    out -= out.mean()
    out /= out.std()
    return Volume3D(out, vol.affine)


def binarize(vol: Volume3D, threshold: float = 0.5) -> BinaryMask:
    return BinaryMask((np.asarray(vol.data) > threshold).astype(np.uint8), vol.affine)

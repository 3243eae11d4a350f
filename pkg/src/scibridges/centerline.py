"""Spinal cord centerline from a cord mask, and the sagittal tilt angle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, EmptyInputError, ValidationError
from .volume import BinaryMask

__all__ = ["Centerline", "extract_centerline", "sagittal_angle", "DEFAULT_WINDOW"]

DEFAULT_WINDOW = 5


@dataclass(frozen=True, eq=False)
class Centerline:
    """Per-level cord centre and unit tangent.

    levels : I-S voxel indices holding cord, strictly increasing
    centers : (n, 2) R-L / A-P centre in voxel units, after smoothing
    tangents : (n, 3) unit vectors in mm space with positive I-S component
    """

    levels: np.ndarray
    centers: np.ndarray
    tangents: np.ndarray
    raw_centers: np.ndarray
    spacing: tuple

    def __post_init__(self):
        object.__setattr__(self, "_index", {int(z): i for i, z in enumerate(self.levels)})

    def __len__(self):
        return len(self.levels)

    def position(self, level: int) -> int:
        try:
            return self._index[int(level)]
        except KeyError:
            raise KeyError(f"I-S level {level} has no cord voxel on the centerline") from None

    def tangent(self, level: int) -> np.ndarray:
        return self.tangents[self.position(level)]


def _smooth(levels: np.ndarray, raw: np.ndarray, window: int) -> np.ndarray:
    # window shrinks symmetrically near the ends so it stays centred
    half = window // 2
    first, last = levels[0], levels[-1]
    out = np.empty_like(raw)
    for i, z in enumerate(levels):
        h = min(half, z - first, last - z)
        sel = (levels >= z - h) & (levels <= z + h)
        out[i] = raw[sel].mean(axis=0)
    return out


def extract_centerline(sc: BinaryMask, window: int = DEFAULT_WINDOW) -> Centerline:
    """Centre of mass of every axial slice, smoothed along I-S.

    The mask must be RPI. Tangents come from central differences of the
    smoothed centres (one-sided at the first and last level), converted to
    mm before normalising.
    """
    if sc.orientation != "RPI":
        raise ValidationError(f"cord mask must be RPI, got {sc.orientation}")
    if window < 1:
        raise ValidationError(f"smoothing window must be >= 1, got {window}")
    data = np.asarray(sc.data) != 0
    per_level = data.sum(axis=(0, 1))
    levels = np.nonzero(per_level)[0]
    if levels.size == 0:
        raise EmptyInputError("cord mask is empty")
    if levels.size == 1:
        raise DegenerateInputError(f"cord present on a single I-S level ({levels[0]}); no tangent defined")

    counts = per_level[levels].astype(np.float64)
    rl = np.arange(data.shape[0], dtype=np.float64)
    ap = np.arange(data.shape[1], dtype=np.float64)
    sum_rl = np.einsum("i,ijk->k", rl, data[:, :, levels].astype(np.float64))
    sum_ap = np.einsum("j,ijk->k", ap, data[:, :, levels].astype(np.float64))
    raw = np.stack([sum_rl / counts, sum_ap / counts], axis=1)
    centers = _smooth(levels, raw, window)

    pts = np.column_stack([centers, levels.astype(np.float64)])
    diffs = np.empty_like(pts)
    diffs[1:-1] = pts[2:] - pts[:-2]
    diffs[0] = pts[1] - pts[0]
    diffs[-1] = pts[-1] - pts[-2]
    tangents = diffs * np.asarray(sc.spacing)
    tangents /= np.linalg.norm(tangents, axis=1, keepdims=True)
    return Centerline(levels, centers, tangents, raw, tuple(sc.spacing))


def sagittal_angle(cl: Centerline, level: int) -> float:
    """Tilt of the tangent in the sagittal (A-P, I-S) plane, radians in [0, pi/2)."""
    t = cl.tangent(level)
    return math.atan2(abs(float(t[1])), float(t[2]))

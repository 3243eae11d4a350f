"""Voxel Dice and lesion-wise detection metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import GeometryMismatchError, ValidationError
from .volume import BinaryMask, check_same_geometry

__all__ = [
    "LabeledComponents",
    "LesionWiseMetrics",
    "dice",
    "connected_components",
    "lesion_wise_counts",
]


@dataclass(frozen=True, eq=False)
class LabeledComponents:
    labels: np.ndarray
    count: int
    sizes: np.ndarray  # sizes[i] is the voxel count of component i + 1
    connectivity: int


def _rate(num: int, den: int, other: int) -> float:
    if den:
        return num / den
    # nothing predicted and nothing missed -> perfect
    return 1.0 if other == 0 else 0.0


@dataclass(frozen=True)
class LesionWiseMetrics:
    tp: int
    fp: int
    fn: int

    @property
    def ppv_l(self) -> float:
        return _rate(self.tp, self.tp + self.fp, self.fn)

    @property
    def sens_l(self) -> float:
        return _rate(self.tp, self.tp + self.fn, self.fp)

    @property
    def f1_l(self) -> float:
        p, s = self.ppv_l, self.sens_l
        if p + s == 0:
            return 0.0
        return 2 * p * s / (p + s)

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "ppv_l": self.ppv_l,
            "sens_l": self.sens_l,
            "f1_l": self.f1_l,
        }


def _array(mask) -> np.ndarray:
    data = mask.data if isinstance(mask, BinaryMask) else mask
    return np.asarray(data) != 0


def dice(pred, gt) -> float:
    """2|P & G| / (|P| + |G|); 1.0 when both are empty."""
    if isinstance(pred, BinaryMask) and isinstance(gt, BinaryMask):
        check_same_geometry(pred, gt, ("prediction", "ground truth"))
    p, g = _array(pred), _array(gt)
    if p.shape != g.shape:
        raise GeometryMismatchError(f"shape mismatch: {p.shape} vs {g.shape}")
    total = int(np.count_nonzero(p)) + int(np.count_nonzero(g))
    if total == 0:
        return 1.0
    return 2.0 * int(np.count_nonzero(p & g)) / total


def connected_components(mask, connectivity: int = 26) -> LabeledComponents:
    labels, count = kernels.label_components(_array(mask), connectivity)
    sizes = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    return LabeledComponents(labels, count, sizes, connectivity)


def lesion_wise_counts(pred, gt, connectivity: int = 26, min_overlap_voxels: int = 1) -> LesionWiseMetrics:
    """Detection counts over connected components.

    A ground-truth lesion is detected when some predicted component shares at
    least ``min_overlap_voxels`` voxels with it; a predicted component is a
    false positive when it reaches that overlap with no ground-truth lesion.
    One prediction may detect several lesions.
    """
    if min_overlap_voxels < 1:
        raise ValidationError("min_overlap_voxels must be >= 1")
    if isinstance(pred, BinaryMask) and isinstance(gt, BinaryMask):
        check_same_geometry(pred, gt, ("prediction", "ground truth"))
    pc = connected_components(pred, connectivity)
    gc = connected_components(gt, connectivity)
    if pc.labels.shape != gc.labels.shape:
        raise GeometryMismatchError(f"shape mismatch: {pc.labels.shape} vs {gc.labels.shape}")

    both = (pc.labels > 0) & (gc.labels > 0)
    pairs = pc.labels[both].astype(np.int64) * (gc.count + 1) + gc.labels[both]
    keys, overlap = np.unique(pairs, return_counts=True)
    matched = keys[overlap >= min_overlap_voxels]
    pred_hit = np.unique(matched // (gc.count + 1))
    gt_hit = np.unique(matched % (gc.count + 1))

    tp = int(gt_hit.size)
    return LesionWiseMetrics(tp=tp, fp=pc.count - int(pred_hit.size), fn=gc.count - tp)

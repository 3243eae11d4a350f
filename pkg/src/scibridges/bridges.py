"""Ventral and dorsal tissue bridges from cord and lesion masks.

All inputs are RPI: axis 0 is R-L (sagittal slices), axis 1 runs posterior
to anterior, axis 2 inferior to superior. Ventral bridges therefore lie at
larger A-P indices than the lesion, dorsal bridges at smaller ones.

Per sagittal slice and per I-S row crossed by the lesion, the bridge is the
number of spared cord voxels beyond the lesion edge times the A-P spacing,
optionally times ``cos`` of the cord's sagittal tilt at that row. The
reported width is the minimum over rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .centerline import DEFAULT_WINDOW, Centerline, extract_centerline, sagittal_angle
from .errors import EmptyInputError, ValidationError
from .volume import BinaryMask, check_same_geometry

__all__ = [
    "BridgeMeasurement",
    "BridgeReport",
    "midsagittal_index",
    "measure_bridges_slice",
    "analyze_bridges",
]


@dataclass
class BridgeMeasurement:
    sagittal_index: int
    ventral_width_mm: Optional[float]
    dorsal_width_mm: Optional[float]
    min_row_ventral: Optional[int] = None
    min_row_dorsal: Optional[int] = None
    # mean sagittal tilt (degrees) over the measured rows
    angle_deg: Optional[float] = None
    warnings: list = field(default_factory=list)

    @property
    def has_lesion(self) -> bool:
        return self.ventral_width_mm is not None


@dataclass
class BridgeReport:
    midsagittal_index: int
    angle_corrected: bool
    per_slice: list
    spacing: tuple
    lesion_absent: bool = False
    all_slices: bool = False
    warnings: list = field(default_factory=list)

    def slice(self, index: int) -> Optional[BridgeMeasurement]:
        for m in self.per_slice:
            if m.sagittal_index == index:
                return m
        return None

    @property
    def midsagittal(self) -> Optional[BridgeMeasurement]:
        return self.slice(self.midsagittal_index)


def _check_rpi(*masks):
    for m in masks:
        if m.orientation != "RPI":
            raise ValidationError(f"masks must be RPI, got {m.orientation}")


def midsagittal_index(sc: BinaryMask) -> int:
    """Lower-middle of the sorted sagittal slices that contain cord."""
    _check_rpi(sc)
    present = np.nonzero(np.asarray(sc.data).any(axis=(1, 2)))[0]
    if present.size == 0:
        raise EmptyInputError("cord mask is empty")
    return int(present[(present.size - 1) // 2])


def measure_bridges_slice(
    sc: BinaryMask,
    lesion: BinaryMask,
    s: int,
    cl: Optional[Centerline],
    angle_correct: bool = True,
) -> BridgeMeasurement:
    check_same_geometry(sc, lesion, ("cord mask", "lesion mask"))
    _check_rpi(sc, lesion)
    if not 0 <= s < sc.dims[0]:
        raise ValidationError(f"sagittal index {s} outside 0..{sc.dims[0] - 1}")
    if angle_correct and cl is None:
        raise ValidationError("angle correction needs a centerline")

    sc_sl = np.asarray(sc.data[s]) != 0
    les_raw = np.asarray(lesion.data[s]) != 0
    les = les_raw & sc_sl
    warnings = []
    outside = int(np.count_nonzero(les_raw & ~sc_sl))
    if outside:
        warnings.append(f"slice {s}: {outside} lesion voxel(s) outside the cord were ignored")

    has, ventral, dorsal = kernels.bridge_row_counts(sc_sl, les)
    rows = np.nonzero(has)[0]
    if rows.size == 0:
        return BridgeMeasurement(int(s), None, None, warnings=warnings)

    spacing_ap = sc.spacing[1]
    if angle_correct:
        angles = np.array([sagittal_angle(cl, z) for z in rows])
    else:
        angles = np.zeros(rows.size)
    factor = spacing_ap * np.cos(angles)
    v_mm = ventral[rows] * factor
    d_mm = dorsal[rows] * factor

    iv, idd = int(np.argmin(v_mm)), int(np.argmin(d_mm))
    v_min, d_min = float(v_mm[iv]), float(d_mm[idd])
    return BridgeMeasurement(
        sagittal_index=int(s),
        ventral_width_mm=v_min,
        dorsal_width_mm=d_min,
        min_row_ventral=int(rows[iv]) if v_min > 0 else None,
        min_row_dorsal=int(rows[idd]) if d_min > 0 else None,
        angle_deg=float(np.degrees(angles.mean())),
        warnings=warnings,
    )


def analyze_bridges(
    sc: BinaryMask,
    lesion: BinaryMask,
    all_slices: bool = False,
    angle_correct: bool = True,
    window: int = DEFAULT_WINDOW,
) -> BridgeReport:
    """Tissue bridges of the midsagittal slice, or of every lesion slice.

    Multiple lesion components are measured as their union.
    """
    check_same_geometry(sc, lesion, ("cord mask", "lesion mask"))
    _check_rpi(sc, lesion)
    mid = midsagittal_index(sc)
    cl = extract_centerline(sc, window=window) if angle_correct else None

    les_in_sc = (np.asarray(lesion.data) != 0) & (np.asarray(sc.data) != 0)
    lesion_slices = np.nonzero(les_in_sc.any(axis=(1, 2)))[0]
    report = BridgeReport(
        midsagittal_index=mid,
        angle_corrected=angle_correct,
        per_slice=[],
        spacing=tuple(sc.spacing),
        lesion_absent=lesion_slices.size == 0,
        all_slices=all_slices,
    )
    if not np.asarray(lesion.data).any():
        return report
    if lesion_slices.size == 0:
        report.warnings.append("lesion mask does not intersect the cord")
        return report

    targets = [int(s) for s in lesion_slices] if all_slices else [mid]
    for s in targets:
        m = measure_bridges_slice(sc, lesion, s, cl, angle_correct)
        report.warnings.extend(m.warnings)
        if all_slices and not m.has_lesion:
            continue
        report.per_slice.append(m)
    return report


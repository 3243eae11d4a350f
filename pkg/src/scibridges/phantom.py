"""Synthetic cord and lesion masks with known tissue-bridge widths.

The cord is a straight cylinder through the volume centre, tilted by
``sagittal_tilt_deg`` in the A-P / I-S plane (measured in mm). A voxel belongs
to it iff its centre lies within ``cord_radius_mm`` of the axis. The cord is
kept on the I-S levels where its whole axial cross-section fits inside the
grid with a one-voxel margin.

The lesion follows the cord: in each of its (R-L, I-S) rows it occupies the
cord voxels left after removing ``dorsal_gap_voxels`` at the posterior end
and ``ventral_gap_voxels`` at the anterior end. That is a box in the tilted
frame whose spared A-P counts are exactly the designed gaps in every row, so
the expected widths are ``gap * spacing_AP`` uncorrected and
``gap * spacing_AP * cos(tilt)`` corrected.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .volume import BinaryMask, affine_from_spacing

__all__ = ["LesionBox", "PhantomSpec", "PhantomTruth", "generate_phantom", "PHANTOM_SCHEMA"]

PHANTOM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "scibridges phantom spec",
    "type": "object",
    "required": [
        "dims",
        "spacing",
        "cord_radius_mm",
        "sagittal_tilt_deg",
        "lesion",
        "ventral_gap_voxels",
        "dorsal_gap_voxels",
    ],
    "additionalProperties": False,
    "properties": {
        "dims": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 3,
            "maxItems": 3,
        },
        "spacing": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0},
            "minItems": 3,
            "maxItems": 3,
        },
        "cord_radius_mm": {"type": "number", "exclusiveMinimum": 0},
        "sagittal_tilt_deg": {"type": "number", "minimum": 0, "maximum": 45},
        "lesion": {
            "type": "object",
            "required": ["center", "half_extents"],
            "additionalProperties": False,
            "properties": {
                "center": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 0},
                    "minItems": 3,
                    "maxItems": 3,
                },
                "half_extents": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 0},
                    "minItems": 3,
                    "maxItems": 3,
                },
            },
        },
        "ventral_gap_voxels": {"type": "integer", "minimum": 0},
        "dorsal_gap_voxels": {"type": "integer", "minimum": 0},
    },
}


@dataclass(frozen=True)
class LesionBox:
    """Lesion placement in voxels.

    Only the R-L and I-S components are used: the A-P extent of the lesion
    is fixed by the designed gaps, and its A-P position by the cord.
    """

    center: tuple
    half_extents: tuple


@dataclass(frozen=True)
class PhantomSpec:
    dims: tuple
    spacing: tuple
    cord_radius_mm: float
    sagittal_tilt_deg: float
    lesion: LesionBox
    ventral_gap_voxels: int = 0
    dorsal_gap_voxels: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "PhantomSpec":
        les = d["lesion"]
        return cls(
            dims=tuple(int(v) for v in d["dims"]),
            spacing=tuple(float(v) for v in d["spacing"]),
            cord_radius_mm=float(d["cord_radius_mm"]),
            sagittal_tilt_deg=float(d["sagittal_tilt_deg"]),
            lesion=LesionBox(tuple(int(v) for v in les["center"]), tuple(int(v) for v in les["half_extents"])),
            ventral_gap_voxels=int(d["ventral_gap_voxels"]),
            dorsal_gap_voxels=int(d["dorsal_gap_voxels"]),
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dims"] = list(self.dims)
        d["spacing"] = list(self.spacing)
        d["lesion"] = {"center": list(self.lesion.center), "half_extents": list(self.lesion.half_extents)}
        return d


@dataclass(frozen=True)
class PhantomTruth:
    midsagittal_index: int
    # None when the lesion does not reach the midsagittal slice
    ventral_mm: Optional[float]
    dorsal_mm: Optional[float]
    ventral_mm_corrected: Optional[float]
    dorsal_mm_corrected: Optional[float]
    tilt_deg: float
    lesion_slices: tuple
    lesion_rows: tuple
    cord_levels: tuple


def _cord_mask(spec: PhantomSpec):
    nx, ny, nz = spec.dims
    sx, sy, sz = spec.spacing
    r = spec.cord_radius_mm
    t = math.radians(spec.sagittal_tilt_deg)
    cx, cy, cz = nx // 2, ny // 2, nz // 2

    if r < sx * 0.5:
        raise ValidationError("cord radius is smaller than half an R-L voxel")
    if cx - r / sx < 1 or cx + r / sx > nx - 2:
        raise ValidationError(f"cord of radius {r} mm does not fit {nx} R-L voxels")

    # axial cross-section centre (A-P, mm) and half-chord per level
    z_mm = np.arange(nz) * sz
    y_center = cy * sy + (z_mm - cz * sz) * math.tan(t)
    half_chord = r / math.cos(t)
    fits = (y_center - half_chord >= sy) & (y_center + half_chord <= (ny - 2) * sy)
    levels = np.nonzero(fits)[0]
    if levels.size < 5 or np.any(np.diff(levels) != 1):
        raise ValidationError(
            f"dims {spec.dims} too small for a cord of radius {r} mm tilted {spec.sagittal_tilt_deg} deg"
        )

    x = (np.arange(nx) - cx) * sx
    y = np.arange(ny) * sy - cy * sy
    z = z_mm - cz * sz
    X, Y, Z = np.meshgrid(x, y, z, indexing="ij")
    # distance to the axis through the centre with direction (0, sin t, cos t)
    along = Y * math.sin(t) + Z * math.cos(t)
    perp_y = Y - along * math.sin(t)
    perp_z = Z - along * math.cos(t)
    inside = X * X + perp_y * perp_y + perp_z * perp_z <= r * r + 1e-9
    inside[:, :, ~fits] = False
    return inside, levels


def generate_phantom(spec: PhantomSpec):
    """Return ``(sc, lesion, truth)`` for ``spec``; masks are RPI."""
    if len(spec.dims) != 3 or len(spec.spacing) != 3:
        raise ValidationError("dims and spacing need three components")
    if any(s <= 0 for s in spec.spacing):
        raise ValidationError("spacing must be positive")
    if not 0 <= spec.sagittal_tilt_deg <= 45:
        raise ValidationError("sagittal tilt must lie in [0, 45] degrees")
    if spec.ventral_gap_voxels < 0 or spec.dorsal_gap_voxels < 0:
        raise ValidationError("gaps must be >= 0")

    cord, levels = _cord_mask(spec)
    lx, _, lz = spec.lesion.center
    hx, _, hz = spec.lesion.half_extents
    xs = range(lx - hx, lx + hx + 1)
    zs = range(lz - hz, lz + hz + 1)
    if xs.start < 0 or xs.stop > spec.dims[0] or zs.start < levels[0] or zs.stop - 1 > levels[-1]:
        raise ValidationError(
            f"lesion box x={xs.start}..{xs.stop - 1}, z={zs.start}..{zs.stop - 1} "
            f"leaves the cord (levels {levels[0]}..{levels[-1]})"
        )

    vg, dg = spec.ventral_gap_voxels, spec.dorsal_gap_voxels
    lesion = np.zeros(spec.dims, dtype=np.uint8)
    for x in xs:
        for z in zs:
            chord = np.nonzero(cord[x, :, z])[0]
            if chord.size <= vg + dg:
                raise ValidationError(
                    f"lesion exceeds the cord at (x={x}, z={z}): chord of {chord.size} voxels "
                    f"cannot hold gaps {dg} + {vg} plus a lesion voxel"
                )
            lesion[x, chord[dg : chord.size - vg], z] = 1

    affine = affine_from_spacing(spec.spacing, "RPI")
    sc = BinaryMask(cord.astype(np.uint8), affine)
    les = BinaryMask(lesion, affine)

    mid = spec.dims[0] // 2
    cos_t = math.cos(math.radians(spec.sagittal_tilt_deg))
    sy = spec.spacing[1]
    covered = mid in xs
    truth = PhantomTruth(
        midsagittal_index=mid,
        ventral_mm=vg * sy if covered else None,
        dorsal_mm=dg * sy if covered else None,
        ventral_mm_corrected=vg * sy * cos_t if covered else None,
        dorsal_mm_corrected=dg * sy * cos_t if covered else None,
        tilt_deg=float(spec.sagittal_tilt_deg),
        lesion_slices=tuple(xs),
        lesion_rows=tuple(zs),
        cord_levels=(int(levels[0]), int(levels[-1])),
    )
    return sc, les, truth

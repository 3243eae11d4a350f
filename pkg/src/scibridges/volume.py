"""Volumetric data model, orientation handling and NIfTI-1 I/O.

Orientation codes follow the "from" convention used by the Spinal Cord
Toolbox: each letter names the anatomical side where the *first* voxel along
that axis sits. ``"RPI"`` therefore means axis 0 runs right to left, axis 1
posterior to anterior and axis 2 inferior to superior. In the NIfTI world
frame (RAS+) an RPI affine has the diagonal form ``diag(-sx, sy, sz)``.
"""

from __future__ import annotations

import gzip
import os
import struct
import uuid
from dataclasses import dataclass
from pathlib import Path

import nibabel as nib
import numpy as np

from .errors import (
    DimensionalityError,
    GeometryMismatchError,
    NiftiFormatError,
    UnsupportedDtypeError,
    ValidationError,
    VolumeIOError,
)

__all__ = [
    "Volume3D",
    "BinaryMask",
    "read_nifti",
    "read_mask",
    "write_nifti",
    "reorient",
    "orientation_from_affine",
    "check_same_geometry",
]

# letter when the voxel axis points along +world axis / -world axis
_LETTER_POS = ("L", "P", "I")
_LETTER_NEG = ("R", "A", "S")
_AXIS_OF = {"R": 0, "L": 0, "A": 1, "P": 1, "S": 2, "I": 2}
_SIGN_OF = {"L": 1, "P": 1, "I": 1, "R": -1, "A": -1, "S": -1}

# NIfTI datatype code -> numpy dtype
_NIFTI_DTYPES = {
    2: np.uint8,
    4: np.int16,
    8: np.int32,
    16: np.float32,
    64: np.float64,
}
_WRITABLE = tuple(np.dtype(t) for t in _NIFTI_DTYPES.values())


def validate_orientation(code: str) -> str:
    if not isinstance(code, str) or len(code) != 3:
        raise ValidationError(f"orientation must be a 3-letter code, got {code!r}")
    code = code.upper()
    if any(c not in _AXIS_OF for c in code):
        raise ValidationError(f"invalid orientation letter in {code!r}")
    if len({_AXIS_OF[c] for c in code}) != 3:
        raise ValidationError(f"orientation {code!r} does not cover three distinct axes")
    return code


def orientation_from_affine(affine) -> str:
    """Closest orientation code of a 4x4 voxel-to-world affine.

    Oblique affines are assigned greedily: the largest direction-cosine
    component picks its world axis first, so the result is always a valid
    code even near 45 degrees.
    """
    rot = np.asarray(affine, dtype=np.float64)[:3, :3]
    norms = np.linalg.norm(rot, axis=0)
    if np.any(norms <= 0):
        raise ValidationError("affine has a zero-length voxel axis")
    cos = np.abs(rot / norms)
    letters = [""] * 3
    free_vox, free_world = [0, 1, 2], [0, 1, 2]
    for _ in range(3):
        sub = cos[np.ix_(free_world, free_vox)]
        w, v = np.unravel_index(np.argmax(sub), sub.shape)
        world, vox = free_world[w], free_vox[v]
        positive = rot[world, vox] > 0
        letters[vox] = _LETTER_POS[world] if positive else _LETTER_NEG[world]
        free_world.remove(world)
        free_vox.remove(vox)
    return "".join(letters)


def affine_from_spacing(spacing, orientation: str = "RPI", origin=(0.0, 0.0, 0.0)) -> np.ndarray:
    orientation = validate_orientation(orientation)
    aff = np.eye(4)
    aff[:3, :3] = 0.0
    for vox, letter in enumerate(orientation):
        aff[_AXIS_OF[letter], vox] = _SIGN_OF[letter] * float(spacing[vox])
    aff[:3, 3] = origin
    return aff


@dataclass(frozen=True, eq=False)
class Volume3D:
    """Scalar voxel grid with its voxel-to-mm affine.

    ``dims``, ``spacing`` and ``orientation`` are derived from ``data`` and
    ``affine`` so they can never disagree. The data array is stored
    read-only.
    """

    data: np.ndarray
    affine: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3:
            raise ValidationError(f"volume data must be 3-D, got shape {data.shape}")
        if min(data.shape) < 1:
            raise ValidationError(f"volume dims must be >= 1, got {data.shape}")
        affine = np.array(self.affine, dtype=np.float64)
        if affine.shape != (4, 4):
            raise ValidationError(f"affine must be 4x4, got {affine.shape}")
        if not np.all(np.isfinite(affine)):
            raise ValidationError("affine contains non-finite values")
        spacing = np.linalg.norm(affine[:3, :3], axis=0)
        if np.any(spacing <= 0):
            raise ValidationError(f"spacing must be positive, got {tuple(spacing)}")
        orientation = orientation_from_affine(affine)
        data = data.view()
        data.flags.writeable = False
        affine.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "affine", affine)
        object.__setattr__(self, "_spacing", tuple(float(s) for s in spacing))
        object.__setattr__(self, "_orientation", orientation)

    @classmethod
    def from_spacing(cls, data, spacing=(1.0, 1.0, 1.0), orientation="RPI", origin=(0.0, 0.0, 0.0)):
        spacing = tuple(float(s) for s in spacing)
        if len(spacing) != 3 or any(s <= 0 for s in spacing):
            raise ValidationError(f"spacing must be three positive values, got {spacing}")
        return cls(data, affine_from_spacing(spacing, orientation, origin))

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(d) for d in self.data.shape)

    @property
    def spacing(self) -> tuple[float, float, float]:
        return self._spacing

    @property
    def orientation(self) -> str:
        return self._orientation

    def with_data(self, data):
        """New volume of the same class and geometry carrying ``data``."""
        data = np.asarray(data)
        if data.shape != self.data.shape:
            raise ValidationError(f"data shape {data.shape} does not match dims {self.dims}")
        return type(self)(data, self.affine)

    def as_volume(self) -> "Volume3D":
        return Volume3D(self.data, self.affine)

    def geometry(self) -> str:
        sp = ", ".join(f"{s:.4g}" for s in self.spacing)
        return f"dims={self.dims} spacing=({sp}) orientation={self.orientation}"

    def same_geometry(self, other: "Volume3D", rtol: float = 1e-4) -> bool:
        if self.dims != other.dims or self.orientation != other.orientation:
            return False
        scale = max(1.0, float(np.max(np.abs(self.affine))))
        return bool(np.allclose(self.affine, other.affine, rtol=0, atol=rtol * scale))

    def __repr__(self):
        return f"{type(self).__name__}({self.geometry()}, dtype={self.data.dtype})"


class BinaryMask(Volume3D):
    """Volume whose voxels are exactly 0 or 1, stored as ``uint8``."""

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype != np.uint8:
            if data.dtype != bool and data.size and not np.isin(data, (0, 1)).all():
                raise ValidationError("binary mask values must be 0 or 1")
            data = data.astype(np.uint8)
        elif data.size and data.max(initial=0) > 1:
            raise ValidationError("binary mask values must be 0 or 1")
        object.__setattr__(self, "data", data)
        super().__post_init__()

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.data))


def check_same_geometry(a: Volume3D, b: Volume3D, names=("first", "second")):
    if not a.same_geometry(b):
        raise GeometryMismatchError(
            f"geometry mismatch: {names[0]} has {a.geometry()}, {names[1]} has {b.geometry()}"
        )


def reorient(vol: Volume3D, target: str) -> Volume3D:
    """Permute and flip voxel axes so that ``vol.orientation == target``.

    Physical positions are untouched: ``affine @ index`` of every voxel is the
    same before and after.
    """
    target = validate_orientation(target)
    source = vol.orientation
    if source == target:
        return vol
    src_axis_of_world = {_AXIS_OF[c]: i for i, c in enumerate(source)}
    perm = [src_axis_of_world[_AXIS_OF[c]] for c in target]
    flips = [source[p] != target[k] for k, p in enumerate(perm)]

    data = np.transpose(vol.data, perm)
    old = vol.affine
    affine = np.eye(4)
    affine[:3, 3] = old[:3, 3]
    for k, p in enumerate(perm):
        col = old[:3, p]
        if flips[k]:
            affine[:3, 3] += col * (vol.data.shape[p] - 1)
            col = -col
        affine[:3, k] = col
    flip_axes = tuple(k for k, f in enumerate(flips) if f)
    if flip_axes:
        data = np.flip(data, axis=flip_axes)
    return type(vol)(np.ascontiguousarray(data), affine)


def _open_maybe_gzip(path: Path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    return gzip.open(path, "rb") if head == b"\x1f\x8b" else open(path, "rb")


def _check_header(path: Path):
    """Check the raw header bytes before handing the file to nibabel."""
    try:
        with _open_maybe_gzip(path) as fh:
            raw = fh.read(348)
    except (OSError, EOFError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise VolumeIOError(f"cannot read {path}: file not found") from exc
        if isinstance(exc, (gzip.BadGzipFile, EOFError)):
            raise NiftiFormatError(f"{path}: corrupt gzip stream") from exc
        raise VolumeIOError(f"cannot read {path}: {exc}") from exc
    if len(raw) < 348:
        raise NiftiFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    for endian in "<>":
        if struct.unpack(endian + "i", raw[:4])[0] == 348:
            break
    else:
        raise NiftiFormatError(f"{path}: bad sizeof_hdr, not a NIfTI-1 file")
    magic = raw[344:348]
    if magic not in (b"n+1\x00", b"ni1\x00"):
        raise NiftiFormatError(f"{path}: missing NIfTI-1 magic (found {magic!r})")
    dim = struct.unpack(endian + "8h", raw[40:56])
    datatype = struct.unpack(endian + "h", raw[70:72])[0]
    if datatype not in _NIFTI_DTYPES:
        raise UnsupportedDtypeError(datatype, path)
    ndim = dim[0]
    if ndim < 1 or ndim > 7:
        raise NiftiFormatError(f"{path}: invalid dim[0]={ndim}")
    if ndim > 3 and any(d != 1 for d in dim[4 : ndim + 1]):
        raise DimensionalityError(
            f"{path}: {ndim}-D image with shape {dim[1:ndim + 1]}; only 3-D volumes are supported"
        )
    return magic


def read_nifti(path) -> Volume3D:
    """Read a ``.nii`` / ``.nii.gz`` file into a :class:`Volume3D`.

    The sform is used when its code is set, otherwise the qform; with neither,
    an axis-aligned affine built from pixdim with zero origin is assumed.
    Scale slope/intercept are applied by the decoder.
    """
    path = Path(path)
    if not path.exists():
        raise VolumeIOError(f"cannot read {path}: file not found")
    magic = _check_header(path)
    try:
        if magic == b"ni1\x00":
            img = nib.Nifti1Pair.from_filename(str(path))
        else:
            img = nib.Nifti1Image.from_filename(str(path))
        hdr = img.header
        data = np.asanyarray(img.dataobj)
    except OSError as exc:
        raise VolumeIOError(f"cannot read {path}: {exc}") from exc
    except Exception as exc:
        raise NiftiFormatError(f"{path}: {exc}") from exc

    if data.ndim > 3:
        data = data.reshape(data.shape[:3])
    while data.ndim < 3:
        data = data[..., np.newaxis]
    if data.dtype.byteorder not in ("=", "|"):
        data = data.astype(data.dtype.newbyteorder("="))

    sform, scode = hdr.get_sform(coded=True)
    qform, qcode = hdr.get_qform(coded=True)
    if scode:
        affine = sform
    elif qcode:
        affine = qform
    else:
        pix = [float(p) if p > 0 else 1.0 for p in hdr["pixdim"][1:4]]
        affine = np.diag(pix + [1.0])
    return Volume3D(np.ascontiguousarray(data), affine)


def read_mask(path) -> BinaryMask:
    """Read a NIfTI file that must hold only 0/1 values."""
    vol = read_nifti(path)
    try:
        return BinaryMask(vol.data, vol.affine)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _output_dtype(dtype: np.dtype) -> np.dtype:
    dtype = np.dtype(dtype)
    if dtype == np.bool_:
        return np.dtype(np.uint8)
    if dtype.newbyteorder("=") in _WRITABLE and dtype != np.float64:
        return dtype.newbyteorder("=")
    return np.dtype(np.float32)


def _nifti_suffix(path: Path) -> str:
    name = path.name.lower()
    if name.endswith(".nii.gz"):
        return ".nii.gz"
    if name.endswith(".nii"):
        return ".nii"
    raise ValidationError(f"{path}: output file must end in .nii or .nii.gz")


def write_nifti(vol: Volume3D, path, dtype=None) -> None:
    """Write ``vol`` as a single-file little-endian NIfTI-1 image.

    uint8/int16/int32/float32 data keep their type, booleans become uint8 and
    everything else (including float64) is stored as float32 unless ``dtype``
    says otherwise. The file appears atomically (temp file + rename).
    """
    path = Path(path)
    suffix = _nifti_suffix(path)
    out = np.dtype(dtype) if dtype is not None else _output_dtype(vol.data.dtype)
    if out.newbyteorder("=") not in _WRITABLE:
        raise ValidationError(f"cannot write dtype {out} to NIfTI")
    data = np.ascontiguousarray(vol.data, dtype=out.newbyteorder("<"))
    img = nib.Nifti1Image(data, vol.affine)
    img.set_sform(vol.affine, code=1)
    img.set_qform(vol.affine, code=1)
    img.header.set_xyzt_units("mm")
    img.header.set_data_dtype(data.dtype)

    tmp = path.with_name(f".{path.name}.{uuid.uuid4().hex[:8]}{suffix}")
    try:
        img.to_filename(str(tmp))
        os.replace(tmp, path)
    except OSError as exc:
        try:
            tmp.unlink()
        except OSError:
            pass
        raise VolumeIOError(f"cannot write {path}: {exc.strerror or exc}") from exc

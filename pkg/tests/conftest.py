import numpy as np
import pytest

from scibridges.phantom import LesionBox, PhantomSpec
from scibridges.volume import BinaryMask, Volume3D


def make_spec(tilt=0.0, ventral=2, dorsal=0, spacing_ap=0.8, dims=(64, 64, 64), radius=5.0, half=(2, 0, 4)):
    return PhantomSpec(
        dims=dims,
        spacing=(1.0, spacing_ap, 1.0),
        cord_radius_mm=radius,
        sagittal_tilt_deg=tilt,
        lesion=LesionBox((dims[0] // 2, dims[1] // 2, dims[2] // 2), half),
        ventral_gap_voxels=ventral,
        dorsal_gap_voxels=dorsal,
    )


def rpi_mask(data, spacing=(1.0, 1.0, 1.0)):
    return BinaryMask.from_spacing(np.asarray(data, dtype=np.uint8), spacing, "RPI")


def box_cord(dims=(9, 12, 10), x=(2, 6), y=(2, 9), z=(0, 9)):
    """Axis-aligned block cord, inclusive index ranges."""
    data = np.zeros(dims, dtype=np.uint8)
    data[x[0] : x[1] + 1, y[0] : y[1] + 1, z[0] : z[1] + 1] = 1
    return data


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


@pytest.fixture
def random_volume(rng):
    data = rng.normal(size=(5, 6, 7)).astype(np.float32)
    return Volume3D.from_spacing(data, (0.9, 0.7, 1.3), "RPI", origin=(10.0, -4.0, 2.5))

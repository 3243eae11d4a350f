import math

import numpy as np
import pytest

from conftest import make_spec, rpi_mask
from scibridges.centerline import Centerline, extract_centerline, sagittal_angle
from scibridges.errors import DegenerateInputError, EmptyInputError, ValidationError
from scibridges.phantom import generate_phantom
from scibridges.volume import BinaryMask


def sheared_tube(dims=(15, 60, 30), k=1, radius=3, y0=8, spacing=(1.0, 0.8, 1.0)):
    """Disk of ``radius`` voxels whose A-P centre moves ``k`` voxels per I-S level."""
    nx, ny, nz = dims
    x, y = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    data = np.zeros(dims, dtype=np.uint8)
    for z in range(nz):
        data[:, :, z] = (x - nx // 2) ** 2 + (y - (y0 + k * z)) ** 2 <= radius**2
    return rpi_mask(data, spacing)


def test_straight_tube_is_vertical():
    cl = extract_centerline(sheared_tube(k=0))
    assert np.allclose(cl.tangents, [0.0, 0.0, 1.0])
    assert np.allclose(cl.centers, cl.centers[0])
    assert all(sagittal_angle(cl, z) == 0.0 for z in cl.levels)


@pytest.mark.parametrize("k, spacing", [(1, (1.0, 0.8, 1.0)), (2, (1.0, 0.5, 1.2)), (1, (0.7, 1.0, 2.0))])
def test_shear_tilt_matches_closed_form(k, spacing):
    mask = sheared_tube(dims=(15, 80, 25), k=k, spacing=spacing)
    cl = extract_centerline(mask)
    expected = math.atan(k * spacing[1] / spacing[2])
    for z in cl.levels[3:-3]:
        assert sagittal_angle(cl, z) == pytest.approx(expected, abs=1e-9)


def _single_level(tangent):
    t = np.asarray([tangent], dtype=float)
    return Centerline(np.array([4]), np.zeros((1, 2)), t, np.zeros((1, 2)), (1.0, 1.0, 1.0))


@pytest.mark.parametrize(
    "tangent, expected",
    [
        ((0.0, 0.0, 1.0), 0.0),
        ((0.0, 1 / math.sqrt(2), 1 / math.sqrt(2)), math.pi / 4),
        ((0.0, -0.5, math.sqrt(3) / 2), math.pi / 6),
        # the R-L component is discarded by the projection
        ((0.6, 0.0, 0.8), 0.0),
    ],
)
def test_sagittal_angle_closed_forms(tangent, expected):
    assert sagittal_angle(_single_level(tangent), 4) == pytest.approx(expected, abs=1e-15)


def test_phantom_at_30_degrees_recovered_within_one_degree():
    sc, _, _ = generate_phantom(make_spec(tilt=30.0, spacing_ap=0.8))
    cl = extract_centerline(sc)
    inner = cl.levels[3:-3]
    angles = np.degrees([sagittal_angle(cl, z) for z in inner])
    assert np.mean(angles) == pytest.approx(30.0, abs=1.0)
    assert np.max(np.abs(angles - 30.0)) < 2.0


def test_angle_invariant_under_rl_mirror():
    sc, _, _ = generate_phantom(make_spec(tilt=20.0, spacing_ap=0.5))
    mirrored = sc.with_data(np.ascontiguousarray(sc.data[::-1]))
    a, b = extract_centerline(sc), extract_centerline(mirrored)
    assert np.array_equal(a.levels, b.levels)
    for z in a.levels:
        assert sagittal_angle(a, z) == pytest.approx(sagittal_angle(b, z), abs=1e-12)


def test_tangents_unit_and_pointing_superior(rng):
    data = np.zeros((12, 12, 20), dtype=np.uint8)
    for z in range(20):
        cx, cy = rng.integers(3, 9, size=2)
        data[cx - 2 : cx + 2, cy - 2 : cy + 2, z] = 1
    cl = extract_centerline(rpi_mask(data, (0.9, 0.6, 1.4)))
    assert np.all(np.diff(cl.levels) > 0)
    assert np.allclose(np.linalg.norm(cl.tangents, axis=1), 1.0, atol=1e-6)
    assert np.all(cl.tangents[:, 2] > 0)


def test_smoothing_stays_in_window_hull(rng):
    data = np.zeros((12, 12, 25), dtype=np.uint8)
    for z in range(25):
        cx, cy = rng.integers(2, 10, size=2)
        data[cx, cy, z] = 1
        data[cx - 1, cy, z] = 1
    cl = extract_centerline(rpi_mask(data))
    for i in range(len(cl)):
        lo, hi = max(0, i - 2), min(len(cl), i + 3)
        window = cl.raw_centers[lo:hi]
        assert np.all(cl.centers[i] >= window.min(axis=0) - 1e-12)
        assert np.all(cl.centers[i] <= window.max(axis=0) + 1e-12)


def test_errors():
    with pytest.raises(EmptyInputError):
        extract_centerline(rpi_mask(np.zeros((4, 4, 4))))
    single = np.zeros((4, 4, 4))
    single[1:3, 1:3, 2] = 1
    with pytest.raises(DegenerateInputError):
        extract_centerline(rpi_mask(single))
    cl = extract_centerline(sheared_tube(k=0))
    with pytest.raises(KeyError):
        sagittal_angle(cl, 10_000)
    las = BinaryMask.from_spacing(np.ones((3, 3, 3)), orientation="LAS")
    with pytest.raises(ValidationError):
        extract_centerline(las)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from conftest import box_cord, make_spec, rpi_mask
from scibridges.bridges import analyze_bridges, measure_bridges_slice, midsagittal_index
from scibridges.centerline import extract_centerline
from scibridges.errors import EmptyInputError, GeometryMismatchError
from scibridges.phantom import generate_phantom
from scibridges.volume import BinaryMask


@pytest.mark.parametrize("lo, hi, expected", [(10, 20, 15), (10, 21, 15), (7, 7, 7)])
def test_midsagittal_index(lo, hi, expected):
    data = np.zeros((30, 4, 4), dtype=np.uint8)
    data[lo : hi + 1, 1:3, 1:3] = 1
    assert midsagittal_index(rpi_mask(data)) == expected


def test_midsagittal_empty():
    with pytest.raises(EmptyInputError):
        midsagittal_index(rpi_mask(np.zeros((3, 3, 3))))


def straight_case(ventral=3, dorsal=1, spacing_ap=0.8):
    """Block cord A-P 2..11; lesion rows 4..6 leaving the requested counts."""
    sc = box_cord(dims=(9, 14, 12), x=(2, 6), y=(2, 11), z=(0, 11))
    les = np.zeros_like(sc)
    les[3:6, 2 + dorsal : 12 - ventral, 4:7] = 1
    # a wider lesion row elsewhere must not matter: min is over rows
    les[3:6, 2 + dorsal + 1 : 12 - ventral - 1, 7] = 1
    spacing = (1.0, spacing_ap, 1.0)
    return rpi_mask(sc, spacing), rpi_mask(les, spacing)


def test_count_times_spacing_straight_cord():
    sc, les = straight_case(3, 1, 0.8)
    cl = extract_centerline(sc)
    m = measure_bridges_slice(sc, les, 4, cl, angle_correct=True)
    assert m.ventral_width_mm == pytest.approx(2.4, abs=1e-12)
    assert m.dorsal_width_mm == pytest.approx(0.8, abs=1e-12)
    assert m.min_row_ventral == 4 and m.min_row_dorsal == 4
    assert m.angle_deg == 0.0


def test_transection_gives_zero():
    sc, les = straight_case(0, 0)
    m = measure_bridges_slice(sc, les, 4, None, angle_correct=False)
    assert m.ventral_width_mm == 0.0 and m.dorsal_width_mm == 0.0
    assert m.min_row_ventral is None and m.min_row_dorsal is None


def test_slice_without_lesion_reports_absent():
    sc, les = straight_case()
    m = measure_bridges_slice(sc, les, 2, None, angle_correct=False)
    assert m.ventral_width_mm is None and m.dorsal_width_mm is None
    assert not m.has_lesion


def sheared_case(ventral=3, dorsal=1, tilt_deg=30.0, spacing_ap=0.8):
    """Cord shifted one A-P voxel per I-S level; spacing chosen so the tilt is exact."""
    spacing_is = spacing_ap / math.tan(math.radians(tilt_deg))
    nx, ny, nz = 11, 60, 40
    sc = np.zeros((nx, ny, nz), dtype=np.uint8)
    les = np.zeros_like(sc)
    x, y = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    for z in range(nz):
        yc = 8 + z
        sc[:, :, z] = ((x - 5) ** 2 + (y - yc) ** 2 <= 16).astype(np.uint8)
    for z in range(17, 23):
        for xi in range(4, 7):
            chord = np.nonzero(sc[xi, :, z])[0]
            les[xi, chord[dorsal : chord.size - ventral], z] = 1
    spacing = (1.0, spacing_ap, spacing_is)
    return rpi_mask(sc, spacing), rpi_mask(les, spacing)


def test_sheared_cord_angle_correction():
    sc, les = sheared_case(3, 1)
    cl = extract_centerline(sc)
    m = measure_bridges_slice(sc, les, 5, cl, angle_correct=True)
    assert m.ventral_width_mm == pytest.approx(3 * 0.8 * math.cos(math.radians(30)), abs=0.05)
    assert m.ventral_width_mm == pytest.approx(2.078, abs=0.05)
    assert m.angle_deg == pytest.approx(30.0, abs=1e-6)
    raw = measure_bridges_slice(sc, les, 5, cl, angle_correct=False)
    assert raw.ventral_width_mm == pytest.approx(2.4)


def test_all_slices_enumeration():
    sc = box_cord(dims=(31, 12, 10), x=(5, 25), y=(2, 9), z=(0, 9))
    les = np.zeros_like(sc)
    les[14:17, 4:7, 3:6] = 1
    rep = analyze_bridges(rpi_mask(sc), rpi_mask(les), all_slices=True)
    assert [m.sagittal_index for m in rep.per_slice] == [14, 15, 16]
    assert rep.midsagittal_index == 15
    assert rep.midsagittal is rep.per_slice[1]


def test_empty_lesion_sets_flag():
    sc, _ = straight_case()
    empty = sc.with_data(np.zeros(sc.dims, dtype=np.uint8))
    rep = analyze_bridges(sc, empty)
    assert rep.lesion_absent and rep.per_slice == []


def test_midsagittal_only_by_default():
    sc, les = straight_case()
    rep = analyze_bridges(sc, les)
    assert [m.sagittal_index for m in rep.per_slice] == [4]


def test_phantom_ventral_16_dorsal_0():
    sc, les, truth = generate_phantom(make_spec(tilt=0.0, ventral=2, dorsal=0, spacing_ap=0.8))
    assert truth.ventral_mm == pytest.approx(1.6) and truth.dorsal_mm == 0.0
    m = analyze_bridges(sc, les).midsagittal
    assert abs(m.ventral_width_mm - 1.6) <= 0.8
    assert abs(m.dorsal_width_mm - 0.0) <= 0.8


def test_geometry_mismatch():
    sc, les = straight_case()
    other = BinaryMask.from_spacing(les.data, (1.0, 0.5, 1.0))
    with pytest.raises(GeometryMismatchError) as err:
        analyze_bridges(sc, other)
    assert "0.8" in str(err.value) and "0.5" in str(err.value)


def test_lesion_outside_cord_warns_and_uses_intersection():
    sc, les = straight_case(3, 1)
    data = np.array(les.data)
    data[4, 12, 5] = 1  # anterior of the cord
    rep = analyze_bridges(sc, rpi_mask(data, les.spacing), angle_correct=False)
    assert rep.warnings
    assert rep.midsagittal.ventral_width_mm == pytest.approx(2.4)


def test_multiple_components_measured_as_union():
    sc = box_cord(dims=(9, 16, 20), x=(2, 6), y=(2, 13), z=(0, 19))
    les = np.zeros_like(sc)
    les[4, 5:9, 3:5] = 1  # ventral spare 5
    les[4, 8:12, 10:12] = 1  # ventral spare 2, dorsal spare 6
    m = analyze_bridges(rpi_mask(sc), rpi_mask(les), angle_correct=False).midsagittal
    assert m.ventral_width_mm == 2.0
    assert m.dorsal_width_mm == 3.0


# ------------------------------------------------------------ properties


def random_case(seed, spacing_ap=0.7):
    rng = np.random.default_rng(seed)
    nx, ny, nz = 7, 16, 18
    x, y = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    sc = np.zeros((nx, ny, nz), dtype=np.uint8)
    shift = rng.integers(0, 2)
    for z in range(nz):
        sc[:, :, z] = ((x - 3) ** 2 / 9 + (y - 5 - shift * z // 3) ** 2 / 12 <= 1).astype(np.uint8)
    les = (rng.random(sc.shape) < 0.15).astype(np.uint8) & sc
    return rpi_mask(sc, (1.0, spacing_ap, 1.0)), rpi_mask(les, (1.0, spacing_ap, 1.0))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), correct=st.booleans())
def test_dilation_never_widens(seed, correct):
    sc, les = random_case(seed)
    if not les.count:
        return
    grown = (ndimage.binary_dilation(les.data) & (sc.data != 0)).astype(np.uint8)
    a = analyze_bridges(sc, les, all_slices=True, angle_correct=correct)
    b = analyze_bridges(sc, les.with_data(grown), all_slices=True, angle_correct=correct)
    for m in a.per_slice:
        n = b.slice(m.sagittal_index)
        assert n is not None
        assert n.ventral_width_mm <= m.ventral_width_mm + 1e-12
        assert n.dorsal_width_mm <= m.dorsal_width_mm + 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_zero_law_anterior_boundary(seed):
    sc, les = random_case(seed)
    data = np.array(les.data)
    s = midsagittal_index(sc)
    levels = np.nonzero(sc.data[s].any(axis=0))[0]
    z = int(levels[len(levels) // 2])
    chord = np.nonzero(sc.data[s, :, z])[0]
    data[s, chord.max(), z] = 1
    rep = analyze_bridges(sc, les.with_data(data))
    assert rep.midsagittal.ventral_width_mm == 0.0
    data[s, chord.min(), z] = 1
    rep = analyze_bridges(sc, les.with_data(data))
    assert rep.midsagittal.dorsal_width_mm == 0.0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_angle_correction_only_shrinks(seed):
    sc, les = random_case(seed)
    on = analyze_bridges(sc, les, all_slices=True, angle_correct=True)
    off = analyze_bridges(sc, les, all_slices=True, angle_correct=False)
    for a, b in zip(on.per_slice, off.per_slice):
        assert a.ventral_width_mm <= b.ventral_width_mm + 1e-12
        assert a.dorsal_width_mm <= b.dorsal_width_mm + 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), spacing_ap=st.sampled_from([0.5, 0.68, 0.8, 1.1]))
def test_uncorrected_widths_are_multiples_of_spacing(seed, spacing_ap):
    sc, les = random_case(seed, spacing_ap)
    for m in analyze_bridges(sc, les, all_slices=True, angle_correct=False).per_slice:
        for w in (m.ventral_width_mm, m.dorsal_width_mm):
            k = w / spacing_ap
            assert abs(k - round(k)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), correct=st.booleans())
def test_rl_mirror_keeps_midsagittal_widths(seed, correct):
    # cord spans sagittal slices 0..6 (odd count), so the mirror maps mid to mid
    sc, les = random_case(seed)
    flip = lambda m: m.with_data(np.ascontiguousarray(m.data[::-1]))  # noqa: E731
    a = analyze_bridges(sc, les, angle_correct=correct)
    b = analyze_bridges(flip(sc), flip(les), angle_correct=correct)
    assert a.midsagittal_index == b.midsagittal_index == 3
    ma, mb = a.midsagittal, b.midsagittal
    assert ma.has_lesion == mb.has_lesion
    if ma.has_lesion:
        assert ma.ventral_width_mm == pytest.approx(mb.ventral_width_mm, abs=1e-12)
        assert ma.dorsal_width_mm == pytest.approx(mb.dorsal_width_mm, abs=1e-12)

"""Compiled and numpy kernels must agree with each other and with brute force."""

import numpy as np
import pytest

from scibridges import _kernels_py, kernels

BACKENDS = [_kernels_py]
try:
    from scibridges import _ckernels

    BACKENDS.append(_ckernels)
except ImportError:  # pragma: no cover - extension not built
    _ckernels = None

backend_ids = [b.__name__.rsplit(".", 1)[-1] for b in BACKENDS]


def bfs_labels(mask, connectivity):
    """Plain breadth-first flood fill in scan order."""
    offs = [
        (a, b, c)
        for a in (-1, 0, 1)
        for b in (-1, 0, 1)
        for c in (-1, 0, 1)
        if (a, b, c) != (0, 0, 0) and abs(a) + abs(b) + abs(c) <= {6: 1, 18: 2, 26: 3}[connectivity]
    ]
    labels = np.zeros(mask.shape, dtype=np.int32)
    n = 0
    for idx in np.ndindex(mask.shape):
        if not mask[idx] or labels[idx]:
            continue
        n += 1
        labels[idx] = n
        queue = [idx]
        while queue:
            cur = queue.pop()
            for o in offs:
                nb = tuple(c + d for c, d in zip(cur, o))
                if all(0 <= v < s for v, s in zip(nb, mask.shape)) and mask[nb] and not labels[nb]:
                    labels[nb] = n
                    queue.append(nb)
    return labels, n


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_compiled_backend_available():
    assert _ckernels is not None, "compiled kernels not built; run pip install -e . --no-build-isolation"


@pytest.mark.parametrize("impl", BACKENDS, ids=backend_ids)
@pytest.mark.parametrize("connectivity", [6, 18, 26])
def test_labels_equal_bfs_exactly(impl, connectivity, rng):
    for _ in range(30):
        mask = rng.random((6, 7, 5)) < rng.uniform(0.1, 0.6)
        got, n = impl.label_components(mask, connectivity)
        want, m = bfs_labels(mask, connectivity)
        assert n == m
        # scan-order labeling makes the labels identical, not just equivalent
        assert np.array_equal(got, want)


@pytest.mark.parametrize("impl", BACKENDS, ids=backend_ids)
def test_corner_touching_voxels(impl):
    mask = np.zeros((2, 2, 2), dtype=np.uint8)
    mask[0, 0, 0] = mask[1, 1, 1] = 1
    assert impl.label_components(mask, 26)[1] == 1
    assert impl.label_components(mask, 18)[1] == 2
    assert impl.label_components(mask, 6)[1] == 2


@pytest.mark.parametrize("impl", BACKENDS, ids=backend_ids)
def test_empty_and_degenerate_shapes(impl):
    labels, n = impl.label_components(np.zeros((3, 3, 3), dtype=bool), 26)
    assert n == 0 and not labels.any()
    labels, n = impl.label_components(np.ones((1, 1, 1), dtype=bool), 6)
    assert n == 1 and labels[0, 0, 0] == 1


@pytest.mark.parametrize("impl", BACKENDS, ids=backend_ids)
def test_spiral_needs_many_merges(impl):
    # long snake forces label chains in both implementations
    mask = np.zeros((1, 21, 21), dtype=bool)
    mask[0, ::2, :] = True
    mask[0, 1::4, -1] = True
    mask[0, 3::4, 0] = True
    labels, n = impl.label_components(mask, 6)
    assert n == 1


def brute_rows(sc, les):
    n_ap, n_is = les.shape
    has = np.zeros(n_is, bool)
    ven = np.zeros(n_is, int)
    dor = np.zeros(n_is, int)
    for z in range(n_is):
        ys = [y for y in range(n_ap) if les[y, z]]
        if not ys:
            continue
        has[z] = True
        ven[z] = sum(1 for y in range(max(ys) + 1, n_ap) if sc[y, z] and not les[y, z])
        dor[z] = sum(1 for y in range(min(ys)) if sc[y, z] and not les[y, z])
    return has, ven, dor


@pytest.mark.parametrize("impl", BACKENDS, ids=backend_ids)
def test_bridge_rows_match_brute_force(impl, rng):
    for _ in range(200):
        sc = rng.random((12, 9)) < 0.8
        les = (rng.random((12, 9)) < 0.2) & sc
        got = impl.bridge_row_counts(sc, les)
        want = brute_rows(sc, les)
        for g, w in zip(got, want):
            assert np.array_equal(np.asarray(g), w)


def test_dispatch_matches_fallback(rng):
    mask = rng.random((10, 10, 10)) < 0.3
    a = kernels.label_components(mask, 26)
    b = _kernels_py.label_components(mask, 26)
    assert a[1] == b[1] and np.array_equal(a[0], b[0])
    with pytest.raises(ValueError):
        kernels.label_components(mask, 8)

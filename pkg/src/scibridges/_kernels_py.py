"""Numpy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable, and kept as the
reference the compiled path is tested against.
"""

import numpy as np

_MAX_NONZERO = {6: 1, 18: 2, 26: 3}


def neighbor_offsets(connectivity):
    """Forward half of the neighborhood (lexicographically positive offsets)."""
    if connectivity not in _MAX_NONZERO:
        raise ValueError(f"connectivity must be 6, 18 or 26, got {connectivity}")
    limit = _MAX_NONZERO[connectivity]
    offsets = []
    for d0 in (-1, 0, 1):
        for d1 in (-1, 0, 1):
            for d2 in (-1, 0, 1):
                off = (d0, d1, d2)
                if off <= (0, 0, 0):
                    continue
                if sum(1 for d in off if d) <= limit:
                    offsets.append(off)
    return offsets


def _shift_slices(off, shape):
    src, dst = [], []
    for d, n in zip(off, shape):
        if d >= 0:
            src.append(slice(0, n - d))
            dst.append(slice(d, n))
        else:
            src.append(slice(-d, n))
            dst.append(slice(0, n + d))
    return tuple(src), tuple(dst)


def label_components(mask, connectivity=26):
    """Label connected foreground components.

    Returns ``(labels, count)`` with int32 labels 1..count ordered by each
    component's first voxel in C (lexicographic index) order.
    """
    fg = np.asarray(mask) != 0
    labels = np.zeros(fg.shape, dtype=np.int32)
    n = int(np.count_nonzero(fg))
    if n == 0:
        return labels, 0
    index = np.full(fg.shape, -1, dtype=np.int64)
    index[fg] = np.arange(n)

    heads, tails = [], []
    for off in neighbor_offsets(connectivity):
        src, dst = _shift_slices(off, fg.shape)
        both = fg[src] & fg[dst]
        if both.any():
            heads.append(index[src][both])
            tails.append(index[dst][both])

    root = np.arange(n, dtype=np.int64)
    if heads:
        a = np.concatenate(heads)
        b = np.concatenate(tails)
        while True:
            m = np.minimum(root[a], root[b])
            new = root.copy()
            np.minimum.at(new, a, m)
            np.minimum.at(new, b, m)
            while True:
                jumped = new[new]
                if np.array_equal(jumped, new):
                    break
                new = jumped
            if np.array_equal(new, root):
                break
            root = new

    # roots are minimal flat indices, so sorted order == first-voxel order
    _, compact = np.unique(root, return_inverse=True)
    labels[fg] = compact.astype(np.int32) + 1
    return labels, int(compact.max()) + 1


def bridge_row_counts(sc, lesion):
    """Per I-S row spared-voxel counts beyond the lesion edges.

    ``sc`` and ``lesion`` are 2-D (A-P, I-S) slices; ``lesion`` must already
    be restricted to the cord. Returns ``(has_lesion, ventral, dorsal)``
    arrays over the I-S axis; ventral counts spared voxels with A-P index
    above the row's highest lesion voxel, dorsal those below the lowest.
    """
    sc = np.asarray(sc) != 0
    les = np.asarray(lesion) != 0
    n_ap, n_is = les.shape
    has = les.any(axis=0)
    ventral = np.zeros(n_is, dtype=np.int64)
    dorsal = np.zeros(n_is, dtype=np.int64)
    if not has.any():
        return has, ventral, dorsal
    spared = (sc & ~les).astype(np.int64)
    cum = np.cumsum(spared, axis=0)
    total = cum[-1]
    cols = np.nonzero(has)[0]
    lo = np.argmax(les[:, cols], axis=0)
    hi = n_ap - 1 - np.argmax(les[::-1, cols], axis=0)
    ventral[cols] = total[cols] - cum[hi, cols]
    # spared is 0 at the lesion voxel itself, so cum[lo] counts rows below lo
    dorsal[cols] = cum[lo, cols]
    return has, ventral, dorsal

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: 3-D connected-component labeling and bridge row counts.

Same contracts as ``scibridges._kernels_py``.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _find(Py_ssize_t[::1] parent, Py_ssize_t i) noexcept nogil:
    cdef Py_ssize_t r = i, nxt
    while parent[r] != r:
        r = parent[r]
    while parent[i] != r:
        nxt = parent[i]
        parent[i] = r
        i = nxt
    return r


cdef inline void _union(Py_ssize_t[::1] parent, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    a = _find(parent, a)
    b = _find(parent, b)
    if a < b:
        parent[b] = a
    elif b < a:
        parent[a] = b


def label_components(mask, int connectivity=26):
    if connectivity not in (6, 18, 26):
        raise ValueError(f"connectivity must be 6, 18 or 26, got {connectivity}")
    cdef cnp.uint8_t[:, :, ::1] m = np.ascontiguousarray(np.asarray(mask) != 0, dtype=np.uint8)
    cdef Py_ssize_t n0 = m.shape[0], n1 = m.shape[1], n2 = m.shape[2]
    labels_arr = np.zeros((n0, n1, n2), dtype=np.int32)
    cdef cnp.int32_t[:, :, ::1] labels = labels_arr
    cdef Py_ssize_t total = n0 * n1 * n2
    if total == 0:
        return labels_arr, 0
    parent_arr = np.arange(total, dtype=np.intp)
    cdef Py_ssize_t[::1] parent = parent_arr

    # backward half-neighborhood, so every neighbor is visited before us
    cdef int limit = 1 if connectivity == 6 else (2 if connectivity == 18 else 3)
    offs = []
    for d0 in (-1, 0, 1):
        for d1 in (-1, 0, 1):
            for d2 in (-1, 0, 1):
                if (d0, d1, d2) >= (0, 0, 0):
                    continue
                if (d0 != 0) + (d1 != 0) + (d2 != 0) <= limit:
                    offs.append((d0, d1, d2))
    cdef int n_off = len(offs)
    cdef int[:, ::1] off = np.asarray(offs, dtype=np.intc).reshape(n_off, 3)

    cdef Py_ssize_t i, j, k, a, b, c, here, r
    cdef int o
    cdef cnp.int32_t count = 0
    with nogil:
        for i in range(n0):
            for j in range(n1):
                for k in range(n2):
                    if not m[i, j, k]:
                        continue
                    here = (i * n1 + j) * n2 + k
                    for o in range(n_off):
                        a = i + off[o, 0]
                        b = j + off[o, 1]
                        c = k + off[o, 2]
                        if a < 0 or b < 0 or c < 0 or a >= n0 or b >= n1 or c >= n2:
                            continue
                        if m[a, b, c]:
                            _union(parent, here, (a * n1 + b) * n2 + c)
        # roots are the smallest flat index of their set; scan order assigns ids
        for i in range(n0):
            for j in range(n1):
                for k in range(n2):
                    if not m[i, j, k]:
                        continue
                    here = (i * n1 + j) * n2 + k
                    r = _find(parent, here)
                    if r == here:
                        count += 1
                        labels[i, j, k] = count
                    else:
                        labels[i, j, k] = labels[r // (n1 * n2), (r // n2) % n1, r % n2]
    return labels_arr, int(count)


def bridge_row_counts(sc, lesion):
    cdef cnp.uint8_t[:, ::1] s = np.ascontiguousarray(np.asarray(sc) != 0, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] l = np.ascontiguousarray(np.asarray(lesion) != 0, dtype=np.uint8)
    cdef Py_ssize_t n_ap = l.shape[0], n_is = l.shape[1]
    has_arr = np.zeros(n_is, dtype=bool)
    ventral_arr = np.zeros(n_is, dtype=np.int64)
    dorsal_arr = np.zeros(n_is, dtype=np.int64)
    cdef cnp.uint8_t[::1] has = has_arr.view(np.uint8)
    cdef cnp.int64_t[::1] ventral = ventral_arr
    cdef cnp.int64_t[::1] dorsal = dorsal_arr
    cdef Py_ssize_t y, z, lo, hi
    cdef cnp.int64_t cnt
    with nogil:
        for z in range(n_is):
            lo = -1
            hi = -1
            for y in range(n_ap):
                if l[y, z]:
                    if lo < 0:
                        lo = y
                    hi = y
            if lo < 0:
                continue
            has[z] = 1
            cnt = 0
            for y in range(hi + 1, n_ap):
                if s[y, z] and not l[y, z]:
                    cnt += 1
            ventral[z] = cnt
            cnt = 0
            for y in range(lo):
                if s[y, z] and not l[y, z]:
                    cnt += 1
            dorsal[z] = cnt
    return has_arr, ventral_arr, dorsal_arr

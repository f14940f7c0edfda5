# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the hot kernels.

Mirrors _kernels_py.py operation for operation: identical float expression
order (the build disables FP contraction) and identical tie-breaking, so both
backends return bit-identical arrays.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, floor
from libc.stdlib cimport free, malloc

cnp.import_array()

BACKEND_NAME = "c"


def slic_iterate(const double[:, :, ::1] lab, double[:, ::1] centers, double wxy,
                 int offset, int iterations):
    cdef int h = lab.shape[0]
    cdef int w = lab.shape[1]
    cdef int k = centers.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] labels_arr = np.full((h, w), -1, dtype=np.int32)
    cdef int[:, ::1] labels = labels_arr
    cdef double[:, ::1] dist = np.full((h, w), INFINITY, dtype=np.float64)
    cdef double[:, ::1] sums = np.zeros((5, k), dtype=np.float64)
    cdef double[::1] cnt = np.zeros(k, dtype=np.float64)
    cdef int it, ki, y, x, x0, x1, y0, y1, ax, ay, best_k
    cdef double cl, ca, cb, cx, cy, dl, da, db, dx, dy, d, best

    for it in range(iterations):
        for y in range(h):
            for x in range(w):
                labels[y, x] = -1
                dist[y, x] = INFINITY
        for ki in range(k):
            cl = centers[ki, 0]
            ca = centers[ki, 1]
            cb = centers[ki, 2]
            cx = centers[ki, 3]
            cy = centers[ki, 4]
            ax = <int>floor(cx + 0.5)
            ay = <int>floor(cy + 0.5)
            x0 = ax - offset
            if x0 < 0:
                x0 = 0
            x1 = ax + offset
            if x1 > w - 1:
                x1 = w - 1
            y0 = ay - offset
            if y0 < 0:
                y0 = 0
            y1 = ay + offset
            if y1 > h - 1:
                y1 = h - 1
            if x0 > x1 or y0 > y1:
                continue
            for y in range(y0, y1 + 1):
                for x in range(x0, x1 + 1):
                    dl = lab[y, x, 0] - cl
                    da = lab[y, x, 1] - ca
                    db = lab[y, x, 2] - cb
                    dx = x - cx
                    dy = y - cy
                    d = ((dl * dl + da * da) + db * db) + wxy * (dx * dx + dy * dy)
                    if d < dist[y, x]:
                        dist[y, x] = d
                        labels[y, x] = ki

        for ki in range(k):
            cnt[ki] = 0.0
            sums[0, ki] = 0.0
            sums[1, ki] = 0.0
            sums[2, ki] = 0.0
            sums[3, ki] = 0.0
            sums[4, ki] = 0.0
        for y in range(h):
            for x in range(w):
                ki = labels[y, x]
                if ki >= 0:
                    sums[0, ki] += lab[y, x, 0]
                    sums[1, ki] += lab[y, x, 1]
                    sums[2, ki] += lab[y, x, 2]
                    sums[3, ki] += x
                    sums[4, ki] += y
                    cnt[ki] += 1.0
        for ki in range(k):
            if cnt[ki] > 0.0:
                centers[ki, 0] = sums[0, ki] / cnt[ki]
                centers[ki, 1] = sums[1, ki] / cnt[ki]
                centers[ki, 2] = sums[2, ki] / cnt[ki]
                centers[ki, 3] = sums[3, ki] / cnt[ki]
                centers[ki, 4] = sums[4, ki] / cnt[ki]

    for y in range(h):
        for x in range(w):
            if labels[y, x] < 0:
                best = INFINITY
                best_k = -1
                for ki in range(k):
                    dl = lab[y, x, 0] - centers[ki, 0]
                    da = lab[y, x, 1] - centers[ki, 1]
                    db = lab[y, x, 2] - centers[ki, 2]
                    dx = x - centers[ki, 3]
                    dy = y - centers[ki, 4]
                    d = ((dl * dl + da * da) + db * db) + wxy * (dx * dx + dy * dy)
                    if d < best:
                        best = d
                        best_k = ki
                labels[y, x] = best_k
    return labels_arr


cdef struct HeapEntry:
    double key
    long pix
    int seg


cdef inline bint _entry_less(HeapEntry a, HeapEntry b) noexcept:
    if a.key != b.key:
        return a.key < b.key
    if a.pix != b.pix:
        return a.pix < b.pix
    return a.seg < b.seg


cdef inline void _heap_push(HeapEntry* data, long* size, double key, long pix,
                            int seg) noexcept:
    cdef long i = size[0]
    cdef long parent
    cdef HeapEntry e
    e.key = key
    e.pix = pix
    e.seg = seg
    data[i] = e
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _entry_less(data[i], data[parent]):
            data[i] = data[parent]
            data[parent] = e
            i = parent
        else:
            break


cdef inline HeapEntry _heap_pop(HeapEntry* data, long* size) noexcept:
    cdef HeapEntry top = data[0]
    cdef HeapEntry last = data[size[0] - 1]
    cdef long i = 0
    cdef long child
    size[0] -= 1
    if size[0] > 0:
        data[0] = last
        while True:
            child = 2 * i + 1
            if child >= size[0]:
                break
            if child + 1 < size[0] and _entry_less(data[child + 1], data[child]):
                child += 1
            if _entry_less(data[child], data[i]):
                data[i] = data[child]
                data[child] = last
                i = child
            else:
                break
    return top


cdef void _push_edges(HeapEntry* data, long* size, int[::1] labels,
                      const float[:, ::1] right, const float[:, ::1] down,
                      long p, int seg, int h, int w):
    cdef long y = p // w
    cdef long x = p - y * w
    if y > 0 and labels[p - w] < 0:
        _heap_push(data, size, -<double>down[y - 1, x], p - w, seg)
    if x > 0 and labels[p - 1] < 0:
        _heap_push(data, size, -<double>right[y, x - 1], p - 1, seg)
    if x < w - 1 and labels[p + 1] < 0:
        _heap_push(data, size, -<double>right[y, x], p + 1, seg)
    if y < h - 1 and labels[p + w] < 0:
        _heap_push(data, size, -<double>down[y, x], p + w, seg)


def watershed_grow(const float[:, ::1] right, const float[:, ::1] down, const long[::1] seeds):
    cdef int h = right.shape[0]
    cdef int w = right.shape[1]
    cdef long n = (<long>h) * w
    cdef cnp.ndarray[cnp.int32_t, ndim=1] labels_arr = np.full(n, -1, dtype=np.int32)
    cdef int[::1] labels = labels_arr
    cdef HeapEntry* data = <HeapEntry*> malloc((4 * n + 8) * sizeof(HeapEntry))
    cdef long size = 0
    cdef long s, p
    cdef HeapEntry e
    if data == NULL:
        raise MemoryError()
    try:
        for s in range(seeds.shape[0]):
            labels[seeds[s]] = <int>s
        for s in range(seeds.shape[0]):
            _push_edges(data, &size, labels, right, down, seeds[s], <int>s, h, w)
        while size > 0:
            e = _heap_pop(data, &size)
            p = e.pix
            if labels[p] >= 0:
                continue
            labels[p] = e.seg
            _push_edges(data, &size, labels, right, down, p, e.seg, h, w)
    finally:
        free(data)
    return labels_arr.reshape(h, w)


def label_components(seg):
    seg_arr = np.ascontiguousarray(seg, dtype=np.int64)
    return _label_components_impl(seg_arr.reshape(-1), seg_arr.shape[0], seg_arr.shape[1])


def _label_components_impl(const long[::1] flat, int h, int w):
    cdef long n = (<long>h) * w
    cdef cnp.ndarray[cnp.int32_t, ndim=1] comp_arr = np.full(n, -1, dtype=np.int32)
    cdef int[::1] comp = comp_arr
    cdef long[::1] stack = np.empty(n, dtype=np.int64)
    cdef long top, start, p, y, x, v
    cdef int nxt = 0

    for start in range(n):
        if comp[start] >= 0:
            continue
        v = flat[start]
        comp[start] = nxt
        top = 0
        stack[top] = start
        top += 1
        while top > 0:
            top -= 1
            p = stack[top]
            y = p // w
            x = p - y * w
            if y > 0 and comp[p - w] < 0 and flat[p - w] == v:
                comp[p - w] = nxt
                stack[top] = p - w
                top += 1
            if x > 0 and comp[p - 1] < 0 and flat[p - 1] == v:
                comp[p - 1] = nxt
                stack[top] = p - 1
                top += 1
            if x < w - 1 and comp[p + 1] < 0 and flat[p + 1] == v:
                comp[p + 1] = nxt
                stack[top] = p + 1
                top += 1
            if y < h - 1 and comp[p + w] < 0 and flat[p + w] == v:
                comp[p + w] = nxt
                stack[top] = p + w
                top += 1
        nxt += 1
    return comp_arr.reshape(h, w), nxt

"""Pure-Python/numpy backend for the hot kernels.

This module is the reference semantics: the compiled backend in _kernels.pyx
must produce bit-identical results (same float operation order, same
tie-breaking). Anything changed here must be mirrored there.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

BACKEND_NAME = "python"


def slic_iterate(lab: np.ndarray, centers: np.ndarray, wxy: float, offset: int,
                 iterations: int) -> np.ndarray:
    """Localized k-means assignment/update loop of SLIC.

    lab: (H, W, 3) float64 Lab image. centers: (K, 5) float64 rows
    [L, a, b, x, y], updated in place. Squared distance
    d = ((L-cL)^2 + (a-ca)^2 + (b-cb)^2) + wxy*((x-cx)^2 + (y-cy)^2)
    is compared directly (sqrt is monotone); ties keep the lowest cluster id.
    Pixels left uncovered by every search window after the final iteration are
    assigned to the nearest center by a full scan.
    """
    h, w = lab.shape[:2]
    k = centers.shape[0]
    lch = lab[:, :, 0]
    ach = lab[:, :, 1]
    bch = lab[:, :, 2]
    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    labels = np.full((h, w), -1, dtype=np.int32)
    dist = np.full((h, w), np.inf, dtype=np.float64)

    for _ in range(iterations):
        labels.fill(-1)
        dist.fill(np.inf)
        for ki in range(k):
            cl, ca, cb, cx, cy = centers[ki]
            ax = int(math.floor(cx + 0.5))
            ay = int(math.floor(cy + 0.5))
            x0 = max(ax - offset, 0)
            x1 = min(ax + offset, w - 1)
            y0 = max(ay - offset, 0)
            y1 = min(ay + offset, h - 1)
            if x0 > x1 or y0 > y1:
                continue
            dl = lch[y0:y1 + 1, x0:x1 + 1] - cl
            da = ach[y0:y1 + 1, x0:x1 + 1] - ca
            db = bch[y0:y1 + 1, x0:x1 + 1] - cb
            dx = xs[x0:x1 + 1][None, :] - cx
            dy = ys[y0:y1 + 1][:, None] - cy
            d = ((dl * dl + da * da) + db * db) + wxy * (dx * dx + dy * dy)
            win_dist = dist[y0:y1 + 1, x0:x1 + 1]
            better = d < win_dist
            win_dist[better] = d[better]
            labels[y0:y1 + 1, x0:x1 + 1][better] = ki

        flat = labels.ravel()
        valid = flat >= 0
        idx = flat[valid]
        cnt = np.bincount(idx, minlength=k).astype(np.float64)
        sums = np.empty((5, k), dtype=np.float64)
        grid_x = np.broadcast_to(xs[None, :], (h, w)).ravel()
        grid_y = np.broadcast_to(ys[:, None], (h, w)).ravel()
        for ch, plane in enumerate((lch.ravel(), ach.ravel(), bch.ravel(), grid_x, grid_y)):
            sums[ch] = np.bincount(idx, weights=plane[valid], minlength=k)
        nonzero = cnt > 0
        for ch in range(5):
            centers[nonzero, ch] = sums[ch, nonzero] / cnt[nonzero]

    flat = labels.ravel()
    for p in np.flatnonzero(flat < 0):
        py = p // w
        px = p - py * w
        best = math.inf
        bk = -1
        for ki in range(k):
            dl = lch[py, px] - centers[ki, 0]
            da = ach[py, px] - centers[ki, 1]
            db = bch[py, px] - centers[ki, 2]
            dx = px - centers[ki, 3]
            dy = py - centers[ki, 4]
            d = ((dl * dl + da * da) + db * db) + wxy * (dx * dx + dy * dy)
            if d < best:
                best = d
                bk = ki
        flat[p] = bk
    return labels


def watershed_grow(right: np.ndarray, down: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Seeded region growing on the 4-connected pixel graph.

    The frontier is a min-heap keyed on (-affinity, target pixel, segment id),
    so the globally strongest edge conducts first and ties resolve to the
    smallest pixel index, then the smallest segment id. `seeds` holds flat
    pixel indices; segment s starts at seeds[s].
    """
    h, w = right.shape
    labels = np.full(h * w, -1, dtype=np.int32)
    for s, p in enumerate(seeds):
        labels[p] = s

    heap: list[tuple[float, int, int]] = []

    def push_edges(p: int, seg: int) -> None:
        y, x = divmod(p, w)
        if y > 0 and labels[p - w] < 0:
            heapq.heappush(heap, (-float(down[y - 1, x]), p - w, seg))
        if x > 0 and labels[p - 1] < 0:
            heapq.heappush(heap, (-float(right[y, x - 1]), p - 1, seg))
        if x < w - 1 and labels[p + 1] < 0:
            heapq.heappush(heap, (-float(right[y, x]), p + 1, seg))
        if y < h - 1 and labels[p + w] < 0:
            heapq.heappush(heap, (-float(down[y, x]), p + w, seg))

    for s, p in enumerate(seeds):
        push_edges(int(p), s)
    while heap:
        _, p, seg = heapq.heappop(heap)
        if labels[p] >= 0:
            continue
        labels[p] = seg
        push_edges(p, seg)
    return labels.reshape(h, w)


def label_components(seg: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected components of equal-value regions.

    Component ids are assigned by row-major order of each component's first
    pixel, which both backends must reproduce exactly.
    """
    h, w = seg.shape
    n = h * w
    flat = seg.ravel().tolist()
    comp = [-1] * n
    nxt = 0
    stack: list[int] = []
    for start in range(n):
        if comp[start] >= 0:
            continue
        v = flat[start]
        comp[start] = nxt
        stack.append(start)
        while stack:
            p = stack.pop()
            y, x = divmod(p, w)
            if y > 0 and comp[p - w] < 0 and flat[p - w] == v:
                comp[p - w] = nxt
                stack.append(p - w)
            if x > 0 and comp[p - 1] < 0 and flat[p - 1] == v:
                comp[p - 1] = nxt
                stack.append(p - 1)
            if x < w - 1 and comp[p + 1] < 0 and flat[p + 1] == v:
                comp[p + 1] = nxt
                stack.append(p + 1)
            if y < h - 1 and comp[p + w] < 0 and flat[p + w] == v:
                comp[p + w] = nxt
                stack.append(p + w)
        nxt += 1
    return np.asarray(comp, dtype=np.int32).reshape(h, w), nxt

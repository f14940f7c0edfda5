"""Superpixel generation and connectivity enforcement.

Two generators produce the over-segmentation consumed by the refinement
stage: SLIC (localized k-means over Lab+position, grid-initialized) and a
seeded watershed over a precomputed pixel-affinity raster. Both are fully
deterministic for a fixed configuration, and both emit maps satisfying the
partition invariants (contiguous non-empty ids, one segment per pixel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import AffinityMap, RgbImage, SuperpixelMap
from .errors import DataError, TooManySuperpixels

# sRGB (D65) -> XYZ matrix and white point, rounded to the constants below so
# independent implementations agree to 1e-6.
_SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_WHITE = (0.95047, 1.0, 1.08883)


@dataclass(frozen=True)
class SlicConfig:
    n: int = 10000
    compactness: float = 10.0
    iterations: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise DataError(f"superpixel count must be >= 1, got {self.n}")
        if self.iterations < 1:
            raise DataError(f"iterations must be >= 1, got {self.iterations}")
        if self.compactness <= 0:
            raise DataError(f"compactness must be > 0, got {self.compactness}")


def rgb_to_lab(image: RgbImage) -> np.ndarray:
    """CIE Lab (D65) image as float64 (H, W, 3)."""
    srgb = image.pixels.astype(np.float64) / 255.0
    linear = np.where(srgb <= 0.04045, srgb / 12.92, ((srgb + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _SRGB_TO_XYZ.T
    ratios = xyz / np.asarray(_WHITE)
    eps = (6.0 / 29.0) ** 3
    f = np.where(ratios > eps, np.cbrt(ratios), ratios / (3.0 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[:, :, 0] = 116.0 * f[:, :, 1] - 16.0
    lab[:, :, 1] = 500.0 * (f[:, :, 0] - f[:, :, 1])
    lab[:, :, 2] = 200.0 * (f[:, :, 1] - f[:, :, 2])
    return np.ascontiguousarray(lab)


def _grid_centers(h: int, w: int, nx: int, ny: int) -> list[tuple[int, int]]:
    """Regular-grid positions (y, x), row-major over the grid."""
    out = []
    for j in range(ny):
        cy = int(math.floor((j + 0.5) * h / ny))
        for i in range(nx):
            cx = int(math.floor((i + 0.5) * w / nx))
            out.append((cy, cx))
    return out


def _lab_gradient(lab: np.ndarray) -> np.ndarray:
    """Squared color-gradient magnitude with replicated borders."""
    h, w = lab.shape[:2]
    xm = np.maximum(np.arange(w) - 1, 0)
    xp = np.minimum(np.arange(w) + 1, w - 1)
    ym = np.maximum(np.arange(h) - 1, 0)
    yp = np.minimum(np.arange(h) + 1, h - 1)
    gx = lab[:, xp, :] - lab[:, xm, :]
    gy = lab[yp, :, :] - lab[ym, :, :]
    return (gx * gx).sum(axis=2) + (gy * gy).sum(axis=2)


_PERTURB_SCAN = ((0, 0), (-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def _perturb_to_low_gradient(grad: np.ndarray, cy: int, cx: int) -> tuple[int, int]:
    h, w = grad.shape
    best = math.inf
    by, bx = cy, cx
    for dy, dx in _PERTURB_SCAN:
        y, x = cy + dy, cx + dx
        if 0 <= y < h and 0 <= x < w and grad[y, x] < best:
            best = grad[y, x]
            by, bx = y, x
    return by, bx


def slic(image: RgbImage, config: SlicConfig) -> SuperpixelMap:
    """SLIC over (L, a, b, x, y) with grid init and connectivity enforcement.

    Distance is d_lab^2 + (compactness/S)^2 * d_xy^2 with S = sqrt(N/n);
    centers start on a regular grid nudged to the lowest-gradient pixel of
    their 3x3 neighborhood, then `iterations` assignment/update rounds run
    within +-ceil(S) search windows.
    """
    h, w = image.height, image.width
    n_pixels = h * w
    if config.n > n_pixels:
        raise TooManySuperpixels(f"requested {config.n} superpixels for {n_pixels} pixels")

    lab = rgb_to_lab(image)
    spacing = math.sqrt(n_pixels / config.n)
    nx = max(1, int(math.floor(w / spacing + 0.5)))
    ny = max(1, int(math.floor(h / spacing + 0.5)))
    grad = _lab_gradient(lab)
    centers = np.empty((nx * ny, 5), dtype=np.float64)
    for idx, (cy, cx) in enumerate(_grid_centers(h, w, nx, ny)):
        py, px = _perturb_to_low_gradient(grad, cy, cx)
        centers[idx] = (lab[py, px, 0], lab[py, px, 1], lab[py, px, 2], px, py)

    wxy = (config.compactness / spacing) ** 2
    offset = max(1, int(math.ceil(spacing)))
    raw = kernels.slic_iterate(lab, centers, wxy, offset, config.iterations)

    # drop ids of clusters that ended empty so the partition is contiguous
    _, compacted = np.unique(raw, return_inverse=True)
    ids, count = _enforce(compacted.reshape(h, w).astype(np.int64))
    return SuperpixelMap(ids.astype(np.uint32), num_segments=count)


def affinity_superpixels(aff: AffinityMap, n: int, seed: int = 0) -> SuperpixelMap:
    """Seeded watershed on the 4-connected affinity graph.

    Seeds start on a ceil(sqrt(n*W/H)) x ceil(sqrt(n*H/W)) grid, trimmed to
    the n positions with the lowest boundary cost (1 - mean incident-edge
    affinity, ties by pixel index). Regions then grow by repeatedly assigning
    the unassigned pixel reachable over the strongest edge. The seed argument
    is accepted for interface symmetry; the procedure is deterministic and
    never consumes randomness.
    """
    h, w = aff.height, aff.width
    n_pixels = h * w
    if n > n_pixels:
        raise TooManySuperpixels(f"requested {n} superpixels for {n_pixels} pixels")
    if n < 1:
        raise DataError(f"superpixel count must be >= 1, got {n}")

    nx = min(w, int(math.ceil(math.sqrt(n * w / h))))
    ny = min(h, int(math.ceil(math.sqrt(n * h / w))))
    while nx * ny < n:  # sqrt rounding can undershoot on extreme aspect ratios
        if nx < w:
            nx += 1
        elif ny < h:
            ny += 1
        else:
            break
    positions = [(y * w + x) for (y, x) in _grid_centers(h, w, nx, ny)]

    if len(positions) > n:
        right = aff.right.astype(np.float64)
        down = aff.down.astype(np.float64)
        costs = {}
        for p in positions:
            y, x = divmod(p, w)
            total = 0.0
            edges = 0
            if y > 0:
                total += down[y - 1, x]
                edges += 1
            if x > 0:
                total += right[y, x - 1]
                edges += 1
            if x < w - 1:
                total += right[y, x]
                edges += 1
            if y < h - 1:
                total += down[y, x]
                edges += 1
            costs[p] = 1.0 - total / edges
        positions.sort(key=lambda p: (costs[p], p))
        positions = positions[:n]
    seeds = np.asarray(sorted(positions), dtype=np.int64)

    labels = kernels.watershed_grow(aff.right, aff.down, seeds)
    return SuperpixelMap(labels.astype(np.uint32), num_segments=len(seeds))


def _first_occurrence_relabel(flat: np.ndarray) -> tuple[np.ndarray, int]:
    values, firsts = np.unique(flat, return_index=True)
    order = np.argsort(firsts, kind="stable")
    lut = np.empty(int(values.max()) + 1, dtype=np.int64)
    for rank, vi in enumerate(order):
        lut[values[vi]] = rank
    return lut[flat], len(values)


def _enforce(ids: np.ndarray) -> tuple[np.ndarray, int]:
    """Shared connectivity enforcement over a raw (contiguous-id) partition.

    Connected components smaller than a quarter of the mean input segment
    size are merged into their largest adjacent region (union size at merge
    time; ties to the smallest component id). Remaining regions are relabeled
    by row-major first occurrence.
    """
    h, w = ids.shape
    n = h * w
    k_in = int(ids.max()) + 1
    comp, ncomp = kernels.label_components(ids)
    comp64 = comp.astype(np.int64)
    sizes = np.bincount(comp64.ravel(), minlength=ncomp).astype(np.int64)

    pairs = set()
    a = comp64[:, :-1].ravel()
    b = comp64[:, 1:].ravel()
    diff = a != b
    pairs.update(zip(a[diff].tolist(), b[diff].tolist()))
    a = comp64[:-1, :].ravel()
    b = comp64[1:, :].ravel()
    diff = a != b
    pairs.update(zip(a[diff].tolist(), b[diff].tolist()))
    adjacency: list[set[int]] = [set() for _ in range(ncomp)]
    for x, y in pairs:
        adjacency[x].add(y)
        adjacency[y].add(x)

    parent = list(range(ncomp))

    def find(c: int) -> int:
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    union_size = sizes.tolist()
    small = [c for c in range(ncomp) if 4 * k_in * int(sizes[c]) < n]
    for c in small:
        root_c = find(c)
        candidates = {find(d) for d in adjacency[c]} - {root_c}
        if not candidates:
            continue
        target = min(candidates, key=lambda r: (-union_size[r], r))
        parent[root_c] = target
        union_size[target] += union_size[root_c]

    roots = np.asarray([find(c) for c in range(ncomp)], dtype=np.int64)
    merged = roots[comp64.ravel()]
    relabeled, count = _first_occurrence_relabel(merged)
    return relabeled.reshape(h, w), count


def enforce_connectivity(sp: SuperpixelMap) -> SuperpixelMap:
    """Merge stray fragments so every segment is 4-connected (ids re-compacted)."""
    ids, count = _enforce(sp.segment_ids.astype(np.int64))
    return SuperpixelMap(ids.astype(np.uint32), num_segments=count)

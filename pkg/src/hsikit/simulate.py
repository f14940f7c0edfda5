"""Synthetic benchmark-shaped scenes for tests, demos, and benchmarks.

Real hyperspectral benchmarks cannot ship with the package, so this module
fabricates scenes with the same structure: contiguous class regions (Voronoi
cells of random sites), smooth per-class spectral signatures, multiplicative
per-pixel gain, additive noise, and a configurable unlabeled share. The
generator is seeded and deterministic.
"""

from __future__ import annotations

import numpy as np

from .core import HyperCube, LabelMap


def _smooth_curves(rng: np.random.Generator, count: int, bands: int) -> np.ndarray:
    """Box-smoothed random walks normalized to [0, 1], one row per curve."""
    walks = rng.standard_normal((count, bands)).cumsum(axis=1)
    width = min(9, bands if bands % 2 else bands - 1) if bands > 1 else 1
    kernel = np.ones(width) / width
    smooth = np.stack([np.convolve(w, kernel, mode="same") for w in walks])
    smooth -= smooth.min(axis=1, keepdims=True)
    smooth /= np.maximum(smooth.max(axis=1, keepdims=True), 1e-9)
    return smooth


def _clustered_signatures(rng: np.random.Generator, num_classes: int, bands: int,
                          scale: float, contrast: float) -> np.ndarray:
    """Per-class spectra grouped into a few look-alike families.

    Families differ strongly (visible in any false-color rendering, like real
    land-cover types); classes within a family differ only by a subtle
    per-class modulation, which is what makes the classification task hard.
    """
    families = max(3, (num_classes + 2) // 3)
    base = _smooth_curves(rng, families, bands) + rng.uniform(0.3, 1.1, size=(families, 1))
    tweak = _smooth_curves(rng, num_classes, bands) - 0.5
    sigs = np.empty((num_classes, bands))
    for c in range(num_classes):
        sigs[c] = base[c % families] * (1.0 + contrast * tweak[c])
    return scale * sigs


def synthetic_scene(height: int = 145, width: int = 145, bands: int = 200,
                    num_classes: int = 16, seed: int = 7, regions: int = 120,
                    unlabeled_share: float = 0.45, noise: float = 0.09,
                    gain_jitter: float = 0.10, contrast: float = 0.12,
                    name: str = "synthetic") -> tuple[HyperCube, LabelMap]:
    """Generate a (cube, labels) pair shaped like the public benchmarks.

    `regions` Voronoi cells are assigned class ids (0 = unlabeled for roughly
    `unlabeled_share` of cells, cycling through 1..num_classes otherwise), so
    every class is present and spatially contiguous. Pixel spectra are the
    class signature times a per-pixel gain plus Gaussian noise; unlabeled
    cells reuse class signatures so they look like real terrain. `contrast`
    controls how distinguishable same-family classes are (lower = harder).
    """
    rng = np.random.default_rng(seed)
    sites = np.stack([rng.uniform(0, height, regions), rng.uniform(0, width, regions)], axis=1)
    ys, xs = np.mgrid[0:height, 0:width]
    d2 = (ys[:, :, None] - sites[:, 0]) ** 2 + (xs[:, :, None] - sites[:, 1]) ** 2
    cell = np.argmin(d2, axis=2)

    # label only cells that actually own pixels, so every class is present
    present = np.unique(cell)
    if present.size < num_classes:
        raise ValueError(f"only {present.size} non-empty regions for {num_classes} classes")
    cell_class = np.zeros(regions, dtype=np.uint16)
    shuffled = present[rng.permutation(present.size)]
    take = max(num_classes, int(present.size * (1 - unlabeled_share)))
    for i, c in enumerate(shuffled[:take]):
        cell_class[c] = (i % num_classes) + 1
    labels = cell_class[cell]

    sigs = np.vstack([np.zeros((1, bands)),
                      _clustered_signatures(rng, num_classes, bands, 1000.0, contrast)])
    # unlabeled terrain mimics a random labeled class per cell
    terrain = np.where(cell_class > 0, cell_class,
                       rng.integers(1, num_classes + 1, size=regions)).astype(np.int64)
    spectra = sigs[terrain[cell]]
    gain = 1.0 + gain_jitter * rng.standard_normal((height, width, 1))
    cube_hwb = spectra * gain + noise * 1000.0 * rng.standard_normal((height, width, bands))
    data = np.ascontiguousarray(cube_hwb.transpose(2, 0, 1).astype(np.float32))

    return HyperCube(data, name=name), LabelMap(labels, num_classes=num_classes)


def synthetic_rgb(height: int, width: int, seed: int = 0, blobs: int = 40) -> np.ndarray:
    """Piecewise-smooth random RGB image (uint8 H x W x 3) for superpixel tests."""
    rng = np.random.default_rng(seed)
    sites = np.stack([rng.uniform(0, height, blobs), rng.uniform(0, width, blobs)], axis=1)
    colors = rng.integers(0, 256, size=(blobs, 3))
    ys, xs = np.mgrid[0:height, 0:width]
    d2 = (ys[:, :, None] - sites[:, 0]) ** 2 + (xs[:, :, None] - sites[:, 1]) ** 2
    img = colors[np.argmin(d2, axis=2)]
    jitter = rng.integers(-10, 11, size=img.shape)
    return np.clip(img + jitter, 0, 255).astype(np.uint8)

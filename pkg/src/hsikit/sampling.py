"""Seeded stratified train/test splits over labeled pixels.

"Fraction of total pixels" is interpreted as a fraction of *labeled* pixels,
apportioned per class by the largest-remainder method in exact integer
arithmetic so every implementation of the recipe lands on the same counts.
Pixel selection within a class is a Fisher-Yates shuffle of the class's
row-major pixel indices driven by a per-class splitmix64 substream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LabelMap, PixelMask
from .errors import EmptyClass, FractionTooSmall
from .rng import STREAM_SPLIT, SplitMix64, mix_seed


@dataclass(frozen=True)
class SplitSpec:
    fraction: float
    seed: int
    stratified: bool = True
    min_per_class: int = 1

    def __post_init__(self):
        if not (0.0 < self.fraction < 1.0):
            raise FractionTooSmall(f"fraction must lie in (0, 1), got {self.fraction}")
        if self.min_per_class < 0:
            raise FractionTooSmall(f"min_per_class must be >= 0, got {self.min_per_class}")


def _apportion(total: int, sizes: list[int], min_per_class: int) -> list[int]:
    """Largest-remainder apportionment of `total` across classes, capped by
    class size, then lifted to the per-class minimum by draining the classes
    with the most slack."""
    L = sum(sizes)
    counts = [total * s // L for s in sizes]
    rems = [total * s - c * L for s, c in zip(sizes, counts)]
    leftover = total - sum(counts)
    order = sorted(range(len(sizes)), key=lambda c: (-rems[c], c))
    i = 0
    while leftover > 0 and i < len(order):
        c = order[i]
        if counts[c] < sizes[c]:
            counts[c] += 1
            leftover -= 1
        i += 1

    mins = [min(min_per_class, s) for s in sizes]
    if sum(mins) > total:
        raise FractionTooSmall(
            f"cannot give every class min_per_class={min_per_class} pixels "
            f"within a train budget of {total}"
        )
    need = sum(max(0, m - c) for m, c in zip(mins, counts))
    for c in range(len(counts)):
        counts[c] = max(counts[c], mins[c])
    while need > 0:
        donor = max(range(len(counts)), key=lambda c: (counts[c] - mins[c], -c))
        if counts[donor] <= mins[donor]:
            raise FractionTooSmall("apportionment cannot satisfy per-class minimums")
        counts[donor] -= 1
        need -= 1
    return counts


def split(labels: LabelMap, spec: SplitSpec) -> tuple[PixelMask, PixelMask]:
    """Partition the labeled pixels into train/test masks.

    Train size is round(fraction * labeled pixels), spread per class by
    largest remainder when stratified. Identical (labels, spec) inputs give
    identical masks.
    """
    lab = labels.labels.ravel()
    C = labels.num_classes
    if C < 1:
        raise EmptyClass("label map contains no labeled pixels")
    class_idx = [np.flatnonzero(lab == c) for c in range(1, C + 1)]
    sizes = [int(ix.size) for ix in class_idx]
    for c, s in enumerate(sizes, start=1):
        if s == 0:
            raise EmptyClass(f"class {c} has zero labeled pixels")
    total_labeled = sum(sizes)
    want = int(np.floor(spec.fraction * total_labeled + 0.5))

    if spec.stratified:
        counts = _apportion(want, sizes, spec.min_per_class)
    else:
        counts = _apportion(want, [total_labeled], 0)

    train = np.zeros(lab.size, dtype=bool)
    if spec.stratified:
        for c, (ix, take) in enumerate(zip(class_idx, counts), start=1):
            picks = ix.copy()
            SplitMix64(mix_seed(spec.seed, STREAM_SPLIT, c)).shuffle(picks)
            train[picks[:take]] = True
    else:
        picks = np.flatnonzero(lab > 0)
        SplitMix64(mix_seed(spec.seed, STREAM_SPLIT, 0)).shuffle(picks)
        train[picks[:counts[0]]] = True

    test = (lab > 0) & ~train
    shape = labels.labels.shape
    return PixelMask(train.reshape(shape)), PixelMask(test.reshape(shape))

"""Majority-vote refinement of a classification map inside superpixels.

Each superpixel tallies the predicted classes of its member pixels and every
member is rewritten to the dominant class (the per-class frequency argmax;
ties resolve to the smallest class id). Refinement is a single pass,
independent of pixel iteration order, and idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ClassMap, LabelMap, PixelMask, SuperpixelMap
from .errors import DimensionMismatch, EmptyMask, EmptySegment


@dataclass(frozen=True, eq=False)
class VoteTally:
    """Class-id histogram of one superpixel; index c holds the votes for class c."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1:
            raise DimensionMismatch("vote counts must be a 1-D histogram")
        object.__setattr__(self, "counts", counts)

    @property
    def segment_size(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        return isinstance(other, VoteTally) and np.array_equal(self.counts, other.counts)


def dominant_class(tally: VoteTally) -> int:
    """Most frequent class id; ties go to the smallest id."""
    if tally.segment_size < 1:
        raise EmptySegment("cannot vote over an empty segment")
    return int(np.argmax(tally.counts))


def tally_votes(z: ClassMap, sp: SuperpixelMap) -> np.ndarray:
    """(num_segments, num_classes+1) histogram of predicted classes per segment."""
    if (z.height, z.width) != (sp.height, sp.width):
        raise DimensionMismatch(
            f"class map is {z.height}x{z.width} but superpixels are {sp.height}x{sp.width}"
        )
    c = z.num_classes
    k = sp.num_segments
    packed = sp.segment_ids.ravel().astype(np.int64) * (c + 1) + z.classes.ravel()
    return np.bincount(packed, minlength=k * (c + 1)).reshape(k, c + 1)


def refine(z: ClassMap, sp: SuperpixelMap) -> ClassMap:
    """Rewrite every pixel to the dominant class of its superpixel."""
    hist = tally_votes(z, sp)
    winners = np.argmax(hist, axis=1).astype(np.uint16)
    out = winners[sp.segment_ids.astype(np.int64)]
    return ClassMap(out, num_classes=z.num_classes)


@dataclass(frozen=True, eq=False)
class RefinementDelta:
    """Before/after accuracy over the test mask plus flip bookkeeping.

    `delta` is computed from integer counts as (fixed - broken) / test_pixels,
    so the reconciliation identity holds exactly.
    """

    oa_before: float
    oa_after: float
    delta: float
    test_pixels: int
    correct_before: int
    correct_after: int
    flipped: int
    fixed: int
    broken: int
    per_segment_flips: np.ndarray | None = None

    def to_dict(self) -> dict:
        d = {
            "oa_before": self.oa_before,
            "oa_after": self.oa_after,
            "delta": self.delta,
            "test_pixels": self.test_pixels,
            "correct_before": self.correct_before,
            "correct_after": self.correct_after,
            "flipped": self.flipped,
            "fixed": self.fixed,
            "broken": self.broken,
        }
        if self.per_segment_flips is not None:
            d["per_segment_flips"] = self.per_segment_flips.tolist()
        return d


def refinement_delta(z: ClassMap, y: ClassMap, truth: LabelMap, test_mask: PixelMask,
                     sp: SuperpixelMap | None = None) -> RefinementDelta:
    """Quantify what refinement changed, scored over test pixels only.

    Pass the superpixel map to also get per-segment flip counts (the map is
    not recoverable from z and y alone).
    """
    dims = (z.height, z.width)
    for name, other in (("refined map", (y.height, y.width)),
                        ("truth", (truth.height, truth.width)),
                        ("test mask", (test_mask.height, test_mask.width))):
        if other != dims:
            raise DimensionMismatch(f"{name} is {other[0]}x{other[1]}, expected {dims[0]}x{dims[1]}")
    sel = test_mask.mask
    total = int(sel.sum())
    if total == 0:
        raise EmptyMask("test mask selects no pixels")
    zt = z.classes[sel].astype(np.int64)
    yt = y.classes[sel].astype(np.int64)
    tt = truth.labels[sel].astype(np.int64)
    correct_before = int((zt == tt).sum())
    correct_after = int((yt == tt).sum())
    fixed = int(((zt != tt) & (yt == tt)).sum())
    broken = int(((zt == tt) & (yt != tt)).sum())

    flips_total = int((z.classes != y.classes).sum())
    per_segment = None
    if sp is not None:
        if (sp.height, sp.width) != dims:
            raise DimensionMismatch("superpixel map dimensions do not match class map")
        flip_px = (z.classes != y.classes).ravel()
        per_segment = np.bincount(sp.segment_ids.ravel()[flip_px].astype(np.int64),
                                  minlength=sp.num_segments)

    return RefinementDelta(
        oa_before=correct_before / total,
        oa_after=correct_after / total,
        delta=(fixed - broken) / total,
        test_pixels=total,
        correct_before=correct_before,
        correct_after=correct_after,
        flipped=flips_total,
        fixed=fixed,
        broken=broken,
        per_segment_flips=per_segment,
    )


def pin_training_labels(z: ClassMap, truth: LabelMap, train_mask: PixelMask) -> ClassMap:
    """Optional extension: substitute known training labels into z before voting."""
    if (z.height, z.width) != (truth.height, truth.width):
        raise DimensionMismatch("class map and truth dimensions disagree")
    if (z.height, z.width) != (train_mask.height, train_mask.width):
        raise DimensionMismatch("class map and train mask dimensions disagree")
    pinned = z.classes.copy()
    sel = train_mask.mask & (truth.labels > 0)
    pinned[sel] = truth.labels[sel]
    return ClassMap(pinned, num_classes=z.num_classes)

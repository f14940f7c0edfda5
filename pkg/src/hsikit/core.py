"""Domain types shared by every stage of the pipeline.

All types are immutable after construction (arrays are marked read-only) and
validate their invariants eagerly, so downstream code can assume well-formed
inputs. Layout convention for cubes is band-sequential: ``data[band, row, col]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    LabelOutOfRange,
    NonFiniteValue,
)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out is arr and arr.flags.writeable:
        out = arr.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class HyperCube:
    """H×W×B reflectance cube stored band-major as float32 with shape (B, H, W)."""

    data: np.ndarray
    name: str | None = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim != 3:
            raise DimensionMismatch(f"cube data must be 3-D (bands, height, width), got shape {data.shape}")
        if min(data.shape) < 1:
            raise DimensionMismatch(f"cube dimensions must all be >= 1, got {data.shape}")
        if not np.isfinite(data).all():
            flat = int(np.flatnonzero(~np.isfinite(data))[0])
            b, y, x = np.unravel_index(flat, data.shape)
            raise NonFiniteValue(f"cube contains non-finite value at band={b}, row={y}, col={x}")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def bands(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def __eq__(self, other):
        return (
            isinstance(other, HyperCube)
            and self.name == other.name
            and self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data)
        )


@dataclass(frozen=True, eq=False)
class LabelMap:
    """H×W ground-truth raster; 0 marks unlabeled, classes run 1..num_classes."""

    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.uint16)
        if labels.ndim != 2:
            raise DimensionMismatch(f"labels must be 2-D, got shape {labels.shape}")
        if min(labels.shape) < 1:
            raise DimensionMismatch(f"label map dimensions must be >= 1, got {labels.shape}")
        present_max = int(labels.max()) if labels.size else 0
        if self.num_classes != present_max:
            raise LabelOutOfRange(
                f"num_classes={self.num_classes} but max label present is {present_max}"
            )
        object.__setattr__(self, "labels", _freeze(labels))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def class_counts(self) -> np.ndarray:
        """Pixel count per class id, index 0 = unlabeled."""
        return np.bincount(self.labels.ravel(), minlength=self.num_classes + 1)

    def __eq__(self, other):
        return (
            isinstance(other, LabelMap)
            and self.num_classes == other.num_classes
            and np.array_equal(self.labels, other.labels)
        )


@dataclass(frozen=True, eq=False)
class ClassMap:
    """H×W prediction raster; total: every pixel carries a class in 1..num_classes."""

    classes: np.ndarray
    num_classes: int

    def __post_init__(self):
        classes = np.asarray(self.classes, dtype=np.uint16)
        if classes.ndim != 2:
            raise DimensionMismatch(f"class map must be 2-D, got shape {classes.shape}")
        if min(classes.shape) < 1:
            raise DimensionMismatch(f"class map dimensions must be >= 1, got {classes.shape}")
        if self.num_classes < 1:
            raise LabelOutOfRange(f"num_classes must be >= 1, got {self.num_classes}")
        lo = int(classes.min())
        hi = int(classes.max())
        if lo < 1:
            y, x = np.unravel_index(int(np.flatnonzero(classes.ravel() < 1)[0]), classes.shape)
            raise LabelOutOfRange(f"class map must be total (no 0); pixel ({y},{x}) is 0")
        if hi > self.num_classes:
            y, x = np.unravel_index(
                int(np.flatnonzero(classes.ravel() > self.num_classes)[0]), classes.shape
            )
            raise LabelOutOfRange(
                f"class id {classes[y, x]} at ({y},{x}) exceeds num_classes={self.num_classes}"
            )
        object.__setattr__(self, "classes", _freeze(classes))

    @property
    def height(self) -> int:
        return self.classes.shape[0]

    @property
    def width(self) -> int:
        return self.classes.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, ClassMap)
            and self.num_classes == other.num_classes
            and np.array_equal(self.classes, other.classes)
        )


@dataclass(frozen=True, eq=False)
class SuperpixelMap:
    """H×W partition into segments with contiguous ids 0..num_segments-1.

    Construction checks the partition property (every id in range and
    non-empty). 4-connectivity is guaranteed by the generators after
    connectivity enforcement, not re-verified here (tests do that with an
    independent BFS oracle).
    """

    segment_ids: np.ndarray
    num_segments: int

    def __post_init__(self):
        ids = np.asarray(self.segment_ids, dtype=np.uint32)
        if ids.ndim != 2:
            raise DimensionMismatch(f"segment ids must be 2-D, got shape {ids.shape}")
        if min(ids.shape) < 1:
            raise DimensionMismatch(f"superpixel map dimensions must be >= 1, got {ids.shape}")
        if self.num_segments < 1:
            raise LabelOutOfRange(f"num_segments must be >= 1, got {self.num_segments}")
        if int(ids.max()) >= self.num_segments:
            raise LabelOutOfRange(
                f"segment id {int(ids.max())} out of range for num_segments={self.num_segments}"
            )
        sizes = np.bincount(ids.ravel(), minlength=self.num_segments)
        if (sizes == 0).any():
            empty = int(np.flatnonzero(sizes == 0)[0])
            raise LabelOutOfRange(f"segment id {empty} is empty; ids must form a contiguous range")
        object.__setattr__(self, "segment_ids", _freeze(ids))

    @property
    def height(self) -> int:
        return self.segment_ids.shape[0]

    @property
    def width(self) -> int:
        return self.segment_ids.shape[1]

    def segment_sizes(self) -> np.ndarray:
        return np.bincount(self.segment_ids.ravel(), minlength=self.num_segments)

    def __eq__(self, other):
        return (
            isinstance(other, SuperpixelMap)
            and self.num_segments == other.num_segments
            and np.array_equal(self.segment_ids, other.segment_ids)
        )


@dataclass(frozen=True, eq=False)
class RgbImage:
    """H×W×3 8-bit image."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3:
            raise DimensionMismatch(f"rgb image must have shape (H, W, 3), got {px.shape}")
        if min(px.shape[:2]) < 1:
            raise DimensionMismatch(f"rgb image dimensions must be >= 1, got {px.shape}")
        object.__setattr__(self, "pixels", _freeze(px))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __eq__(self, other):
        return isinstance(other, RgbImage) and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class AffinityMap:
    """Per-pixel affinities to the right and down 4-neighbors, each in [0, 1].

    ``right[y, x]`` is the affinity of the edge (y,x)-(y,x+1) and
    ``down[y, x]`` of (y,x)-(y+1,x); the last column / row of the respective
    plane is ignored by consumers.
    """

    right: np.ndarray
    down: np.ndarray

    def __post_init__(self):
        right = np.asarray(self.right, dtype=np.float32)
        down = np.asarray(self.down, dtype=np.float32)
        if right.ndim != 2 or down.ndim != 2:
            raise DimensionMismatch("affinity planes must be 2-D")
        if right.shape != down.shape:
            raise DimensionMismatch(
                f"affinity planes disagree: right {right.shape} vs down {down.shape}"
            )
        if min(right.shape) < 1:
            raise DimensionMismatch(f"affinity map dimensions must be >= 1, got {right.shape}")
        for name, plane in (("right", right), ("down", down)):
            if not np.isfinite(plane).all():
                raise NonFiniteValue(f"{name} affinity plane contains non-finite values")
            if plane.min() < 0.0 or plane.max() > 1.0:
                raise LabelOutOfRange(f"{name} affinity values must lie within [0, 1]")
        object.__setattr__(self, "right", _freeze(right))
        object.__setattr__(self, "down", _freeze(down))

    @property
    def height(self) -> int:
        return self.right.shape[0]

    @property
    def width(self) -> int:
        return self.right.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, AffinityMap)
            and np.array_equal(self.right, other.right)
            and np.array_equal(self.down, other.down)
        )


@dataclass(frozen=True, eq=False)
class PixelMask:
    """H×W boolean selection mask."""

    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.ndim != 2:
            raise DimensionMismatch(f"mask must be 2-D, got shape {mask.shape}")
        if min(mask.shape) < 1:
            raise DimensionMismatch(f"mask dimensions must be >= 1, got {mask.shape}")
        object.__setattr__(self, "mask", _freeze(mask))

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    def count(self) -> int:
        return int(self.mask.sum())

    def __eq__(self, other):
        return isinstance(other, PixelMask) and np.array_equal(self.mask, other.mask)


def validate(cube: HyperCube, labels: LabelMap) -> None:
    """Check cube/label invariants and that their spatial dimensions agree.

    Raises DimensionMismatch, NonFiniteValue, or LabelOutOfRange naming the
    offending field or coordinate; returns None when everything holds.
    Constructors already enforce per-type invariants, so the extra work here
    is the cross-type dimension check plus a re-verification of raw payloads
    for objects that may have been built from external files.
    """
    if (cube.height, cube.width) != (labels.height, labels.width):
        raise DimensionMismatch(
            f"cube is {cube.height}x{cube.width} but labels are "
            f"{labels.height}x{labels.width}"
        )
    if not np.isfinite(cube.data).all():
        flat = int(np.flatnonzero(~np.isfinite(cube.data))[0])
        b, y, x = np.unravel_index(flat, cube.data.shape)
        raise NonFiniteValue(f"cube contains non-finite value at band={b}, row={y}, col={x}")
    present_max = int(labels.labels.max())
    if labels.num_classes != present_max:
        raise LabelOutOfRange(
            f"labels.num_classes={labels.num_classes} but max label present is {present_max}"
        )

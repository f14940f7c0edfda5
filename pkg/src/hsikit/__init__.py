"""Hyperspectral pixel classification with superpixel majority-vote refinement.

Pipeline: load a reflectance cube and ground truth, split labeled pixels,
train a lightweight classifier (or import an external map), over-segment the
scene into superpixels, and rewrite each superpixel to its dominant predicted
class. See the CLI (``hsikit --help``) for the end-to-end surface.
"""

from .core import (
    AffinityMap,
    ClassMap,
    HyperCube,
    LabelMap,
    PixelMask,
    RgbImage,
    SuperpixelMap,
    validate,
)
from .errors import HsiError
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "AffinityMap",
    "ClassMap",
    "HyperCube",
    "HsiError",
    "KERNEL_BACKEND",
    "LabelMap",
    "PixelMask",
    "RgbImage",
    "SuperpixelMap",
    "validate",
    "__version__",
]

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hsikit.core import ClassMap, LabelMap, SuperpixelMap
from hsikit.simulate import synthetic_scene


@pytest.fixture(scope="session")
def small_scene():
    """16x20 scene with 4 classes and some unlabeled pixels."""
    return synthetic_scene(16, 20, bands=8, num_classes=4, seed=11, regions=12,
                           unlabeled_share=0.3)


@pytest.fixture(scope="session")
def medium_scene():
    """48x40 scene with 6 classes, enough pixels for split/accuracy tests."""
    return synthetic_scene(48, 40, bands=16, num_classes=6, seed=23, regions=30)


def random_partition(rng, h, w, max_segments):
    """Voronoi partition with contiguous ids (segments need not be connected
    consumers of this helper only need the partition property)."""
    k = int(rng.integers(1, max_segments + 1))
    sites = np.stack([rng.uniform(0, h, k), rng.uniform(0, w, k)], axis=1)
    ys, xs = np.mgrid[0:h, 0:w]
    d2 = (ys[:, :, None] - sites[:, 0]) ** 2 + (xs[:, :, None] - sites[:, 1]) ** 2
    ids = np.argmin(d2, axis=2)
    _, contiguous = np.unique(ids, return_inverse=True)
    ids = contiguous.reshape(h, w)
    return SuperpixelMap(ids.astype(np.uint32), num_segments=int(ids.max()) + 1)


def random_classmap(rng, h, w, num_classes):
    return ClassMap(rng.integers(1, num_classes + 1, size=(h, w)).astype(np.uint16),
                    num_classes=num_classes)


def iid_partition(rng, h, w, max_segments):
    """Fully random (generally disconnected) partition, still with contiguous ids."""
    k = int(rng.integers(1, max_segments + 1))
    ids = rng.integers(0, k, size=(h, w))
    _, contiguous = np.unique(ids, return_inverse=True)
    ids = contiguous.reshape(h, w)
    return SuperpixelMap(ids.astype(np.uint32), num_segments=int(ids.max()) + 1)

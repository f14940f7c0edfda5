"""Pluggable per-pixel classifiers standing in for the deep-network stage.

Features are per-band patch means (box filter clipped at image borders),
optionally standardized with per-band statistics estimated on training pixels
only. Because standardization is affine per band, averaging then z-scoring
equals z-scoring then averaging; the implementation averages first so the
patch means can be computed once per cube and reused across splits.

Two trainable baselines realize the classifier contract: nearest-centroid and
multinomial logistic regression (mini-batch gradient descent, zero init).
Externally produced classification maps can be imported instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import ClassMap, HyperCube, LabelMap, PixelMask
from .errors import (
    BadMagic,
    DimensionMismatch,
    EmptyClass,
    IoFailure,
    LabelOutOfRange,
    NonFiniteLoss,
    NonFiniteValue,
    TruncatedPayload,
)
from . import io as hio
from .rng import STREAM_BATCH, SplitMix64, mix_seed


@dataclass(frozen=True)
class FeatureConfig:
    patch_radius: int = 2
    standardize: bool = True

    def __post_init__(self):
        if self.patch_radius < 0:
            raise DimensionMismatch(f"patch_radius must be >= 0, got {self.patch_radius}")


@dataclass(frozen=True)
class Hyper:
    """Softmax training hyperparameters (defaults: 40 epochs, batch 16, lr 0.001)."""

    learning_rate: float = 0.001
    epochs: int = 40
    batch_size: int = 16
    l2: float = 1e-4
    seed: int = 0


@dataclass(frozen=True, eq=False)
class BandStats:
    """Per-band mean/std of raw spectra over training pixels (std 0 -> 1)."""

    mean: np.ndarray  # (B,) float32
    std: np.ndarray   # (B,) float32

    def __post_init__(self):
        if not (np.isfinite(self.mean).all() and np.isfinite(self.std).all()):
            raise NonFiniteValue("band statistics contain non-finite values")
        if (self.std <= 0).any():
            raise NonFiniteValue("band std values must be positive")

    def __eq__(self, other):
        return (isinstance(other, BandStats)
                and np.array_equal(self.mean, other.mean)
                and np.array_equal(self.std, other.std))


@dataclass(frozen=True, eq=False)
class CentroidModel:
    centroids: np.ndarray  # (C, B) float32
    stats: BandStats | None
    config: FeatureConfig

    def __post_init__(self):
        if not np.isfinite(self.centroids).all():
            raise NonFiniteValue("centroid model contains non-finite values")

    @property
    def num_classes(self) -> int:
        return self.centroids.shape[0]

    def __eq__(self, other):
        return (isinstance(other, CentroidModel)
                and np.array_equal(self.centroids, other.centroids)
                and self.stats == other.stats
                and self.config == other.config)


@dataclass(frozen=True, eq=False)
class SoftmaxModel:
    weights: np.ndarray  # (C, B+1) float32, bias last column
    stats: BandStats | None
    config: FeatureConfig
    hyper: Hyper
    initial_loss: float = 0.0
    final_loss: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.weights).all():
            raise NonFiniteValue("softmax model contains non-finite weights")

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other):
        return (isinstance(other, SoftmaxModel)
                and np.array_equal(self.weights, other.weights)
                and self.stats == other.stats
                and self.config == other.config
                and self.hyper == other.hyper
                and self.initial_loss == other.initial_loss
                and self.final_loss == other.final_loss)


def patch_means(cube: HyperCube, radius: int) -> np.ndarray:
    """Per-band box-filter means over (2r+1)^2 windows clipped at the borders.

    Returns one row per pixel (row-major), shape (H*W, B), float64. Uses a
    summed-area table per band, so cost is independent of the radius.
    """
    b, h, w = cube.data.shape
    if radius > min(h, w) // 2:
        raise DimensionMismatch(
            f"patch_radius {radius} too large for a {h}x{w} image (max {min(h, w) // 2})"
        )
    if radius == 0:
        return cube.data.reshape(b, h * w).T.astype(np.float64)

    ys = np.arange(h)
    xs = np.arange(w)
    y0 = np.maximum(ys - radius, 0)
    y1 = np.minimum(ys + radius, h - 1)
    x0 = np.maximum(xs - radius, 0)
    x1 = np.minimum(xs + radius, w - 1)
    counts = (y1 - y0 + 1)[:, None] * (x1 - x0 + 1)[None, :]

    out = np.empty((h * w, b), dtype=np.float64)
    for bi in range(b):
        sat = np.zeros((h + 1, w + 1), dtype=np.float64)
        np.cumsum(cube.data[bi], axis=0, dtype=np.float64, out=sat[1:, 1:])
        np.cumsum(sat[1:, 1:], axis=1, out=sat[1:, 1:])
        tot = (sat[y1 + 1][:, x1 + 1] - sat[y1 + 1][:, x0]
               - sat[y0][:, x1 + 1] + sat[y0][:, x0])
        out[:, bi] = (tot / counts).ravel()
    return out


def compute_band_stats(cube: HyperCube, train: PixelMask) -> BandStats:
    """Per-band mean/std of raw spectra over training pixels (population std)."""
    if (cube.height, cube.width) != (train.height, train.width):
        raise DimensionMismatch("train mask dimensions do not match cube")
    sel = train.mask.ravel()
    if not sel.any():
        raise EmptyClass("train mask selects no pixels")
    spectra = cube.data.reshape(cube.bands, -1)[:, sel].astype(np.float64)
    mean = spectra.mean(axis=1)
    std = spectra.std(axis=1)
    std[std == 0.0] = 1.0
    return BandStats(mean.astype(np.float32), std.astype(np.float32))


def extract_features(cube: HyperCube, config: FeatureConfig,
                     stats: BandStats | None = None) -> np.ndarray:
    """Feature matrix, one row per pixel (row-major order), float64.

    With stats given (and standardization on) rows are z-scored per band;
    without stats the raw patch means are returned.
    """
    feats = patch_means(cube, config.patch_radius)
    if config.standardize and stats is not None:
        feats = (feats - stats.mean.astype(np.float64)) / stats.std.astype(np.float64)
    return feats


def _train_xy(features: np.ndarray, labels: LabelMap, train: PixelMask):
    if features.shape[0] != labels.height * labels.width:
        raise DimensionMismatch("feature rows do not match label raster size")
    if (labels.height, labels.width) != (train.height, train.width):
        raise DimensionMismatch("train mask dimensions do not match labels")
    sel = train.mask.ravel()
    y = labels.labels.ravel()[sel]
    if (y == 0).any():
        raise LabelOutOfRange("train mask selects unlabeled pixels")
    return features[sel], y.astype(np.int64)


def train_centroid(features: np.ndarray, labels: LabelMap, train: PixelMask,
                   config: FeatureConfig = FeatureConfig(),
                   stats: BandStats | None = None) -> CentroidModel:
    """Per-class mean of training feature rows."""
    x, y = _train_xy(features, labels, train)
    C = labels.num_classes
    centroids = np.empty((C, features.shape[1]), dtype=np.float64)
    for c in range(1, C + 1):
        rows = x[y == c]
        if rows.shape[0] == 0:
            raise EmptyClass(f"class {c} has no training pixels")
        centroids[c - 1] = rows.mean(axis=0)
    return CentroidModel(centroids.astype(np.float32), stats, config)


def softmax_loss_and_grad(weights: np.ndarray, x_aug: np.ndarray, y0: np.ndarray,
                          l2: float) -> tuple[float, np.ndarray]:
    """Mean cross-entropy + l2*||W||^2/2 (bias included) and its gradient.

    `y0` holds zero-based class indices; `x_aug` carries the bias column.
    """
    logits = x_aug @ weights.T
    logits -= logits.max(axis=1, keepdims=True)
    expl = np.exp(logits)
    denom = expl.sum(axis=1)
    m = x_aug.shape[0]
    logp = logits[np.arange(m), y0] - np.log(denom)
    loss = -logp.mean() + 0.5 * l2 * float((weights * weights).sum())
    probs = expl / denom[:, None]
    probs[np.arange(m), y0] -= 1.0
    grad = probs.T @ x_aug / m + l2 * weights
    return float(loss), grad


def train_softmax(features: np.ndarray, labels: LabelMap, train: PixelMask,
                  hyper: Hyper = Hyper(),
                  config: FeatureConfig = FeatureConfig(),
                  stats: BandStats | None = None) -> SoftmaxModel:
    """Mini-batch gradient descent from zero init; batch order is seed-derived."""
    x, y = _train_xy(features, labels, train)
    C = labels.num_classes
    present = np.bincount(y, minlength=C + 1)
    for c in range(1, C + 1):
        if present[c] == 0:
            raise EmptyClass(f"class {c} has no training pixels")
    x_aug = np.hstack([x, np.ones((x.shape[0], 1), dtype=np.float64)])
    y0 = y - 1
    n, d = x_aug.shape
    weights = np.zeros((C, d), dtype=np.float64)

    initial_loss, _ = softmax_loss_and_grad(weights, x_aug, y0, hyper.l2)
    rng = SplitMix64(mix_seed(hyper.seed, STREAM_BATCH))
    order = np.arange(n)
    for epoch in range(hyper.epochs):
        rng.shuffle(order)
        for start in range(0, n, hyper.batch_size):
            batch = order[start:start + hyper.batch_size]
            loss, grad = softmax_loss_and_grad(weights, x_aug[batch], y0[batch], hyper.l2)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"training diverged at epoch {epoch}", epoch=epoch)
            weights -= hyper.learning_rate * grad
    final_loss, _ = softmax_loss_and_grad(weights, x_aug, y0, hyper.l2)
    if not np.isfinite(final_loss):
        raise NonFiniteLoss(f"training diverged at epoch {hyper.epochs - 1}",
                            epoch=hyper.epochs - 1)
    return SoftmaxModel(weights.astype(np.float32), stats, config, hyper,
                        initial_loss=initial_loss, final_loss=final_loss)


def predict(model, features: np.ndarray, dims: tuple[int, int]) -> ClassMap:
    """Total prediction map; ties resolve to the smallest class id."""
    h, w = dims
    if features.shape[0] != h * w:
        raise DimensionMismatch(f"feature rows {features.shape[0]} != {h}x{w} pixels")
    if isinstance(model, CentroidModel):
        cents = model.centroids.astype(np.float64)
        if features.shape[1] != cents.shape[1]:
            raise DimensionMismatch(
                f"feature width {features.shape[1]} does not match model ({cents.shape[1]})"
            )
        # argmin of squared distance; ||f||^2 is constant per row so omitted
        d2 = -2.0 * features @ cents.T + (cents * cents).sum(axis=1)[None, :]
        winner = np.argmin(d2, axis=1)
    elif isinstance(model, SoftmaxModel):
        wts = model.weights.astype(np.float64)
        if features.shape[1] + 1 != wts.shape[1]:
            raise DimensionMismatch(
                f"feature width {features.shape[1]} does not match model ({wts.shape[1] - 1})"
            )
        logits = features @ wts[:, :-1].T + wts[:, -1][None, :]
        winner = np.argmax(logits, axis=1)
    else:
        raise DimensionMismatch(f"unknown model type {type(model).__name__}")
    return ClassMap((winner + 1).astype(np.uint16).reshape(h, w),
                    num_classes=model.num_classes)


def import_classmap(path, labels: LabelMap) -> ClassMap:
    """Load an externally produced .hsp map and validate it against the labels."""
    cm = hio.read_classmap(path)
    if (cm.height, cm.width) != (labels.height, labels.width):
        raise DimensionMismatch(
            f"imported map is {cm.height}x{cm.width} but labels are "
            f"{labels.height}x{labels.width}"
        )
    if cm.num_classes != labels.num_classes:
        raise LabelOutOfRange(
            f"imported map has {cm.num_classes} classes, labels have {labels.num_classes}"
        )
    return cm


def write_model(model, path) -> None:
    """HSW1 container: JSON hyperparameter header + f32 payload.

    Payload order: band mean (B), band std (B) when stats are present, then
    the weight matrix (centroids, or softmax weights with bias column).
    """
    common = {
        "magic": "HSW1",
        "kind": "centroid" if isinstance(model, CentroidModel) else "softmax",
        "num_classes": model.num_classes,
        "patch_radius": model.config.patch_radius,
        "standardize": model.config.standardize,
        "has_stats": model.stats is not None,
        "dtype": "f32le",
    }
    parts = []
    if model.stats is not None:
        common["bands"] = int(model.stats.mean.shape[0])
        parts.append(np.ascontiguousarray(model.stats.mean, dtype="<f4").tobytes())
        parts.append(np.ascontiguousarray(model.stats.std, dtype="<f4").tobytes())
    if isinstance(model, CentroidModel):
        common["feature_dim"] = int(model.centroids.shape[1])
        parts.append(np.ascontiguousarray(model.centroids, dtype="<f4").tobytes())
    elif isinstance(model, SoftmaxModel):
        common["feature_dim"] = int(model.weights.shape[1] - 1)
        common["learning_rate"] = model.hyper.learning_rate
        common["epochs"] = model.hyper.epochs
        common["batch_size"] = model.hyper.batch_size
        common["l2"] = model.hyper.l2
        common["seed"] = model.hyper.seed
        common["initial_loss"] = model.initial_loss
        common["final_loss"] = model.final_loss
        parts.append(np.ascontiguousarray(model.weights, dtype="<f4").tobytes())
    else:
        raise IoFailure(f"unknown model type {type(model).__name__}")
    line = json.dumps(common, separators=(",", ":")) + "\n"
    try:
        with open(path, "wb") as fh:
            fh.write(line.encode("utf-8"))
            for p in parts:
                fh.write(p)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_model(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    nl = raw.find(b"\n")
    if nl < 0:
        raise BadMagic(f"{path}: missing header line")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadMagic(f"{path}: unparsable header ({exc})") from exc
    if header.get("magic") != "HSW1":
        raise BadMagic(f"{path}: expected magic 'HSW1', got {header.get('magic')!r}")
    payload = raw[nl + 1:]
    C = header["num_classes"]
    D = header["feature_dim"]
    config = FeatureConfig(patch_radius=header["patch_radius"],
                           standardize=header["standardize"])
    off = 0

    def take(count):
        nonlocal off
        nbytes = count * 4
        if off + nbytes > len(payload):
            raise TruncatedPayload(f"{path}: model payload too short")
        arr = np.frombuffer(payload, dtype="<f4", count=count, offset=off)
        off += nbytes
        return arr

    stats = None
    if header.get("has_stats"):
        b = header["bands"]
        stats = BandStats(take(b).copy(), take(b).copy())
    if header["kind"] == "centroid":
        cents = take(C * D).reshape(C, D)
        model = CentroidModel(cents, stats, config)
    elif header["kind"] == "softmax":
        hyper = Hyper(learning_rate=header["learning_rate"], epochs=header["epochs"],
                      batch_size=header["batch_size"], l2=header["l2"],
                      seed=header["seed"])
        wts = take(C * (D + 1)).reshape(C, D + 1)
        model = SoftmaxModel(wts, stats, config, hyper,
                             initial_loss=header["initial_loss"],
                             final_loss=header["final_loss"])
    else:
        raise BadMagic(f"{path}: unknown model kind {header['kind']!r}")
    if off != len(payload):
        raise TruncatedPayload(f"{path}: {len(payload) - off} trailing payload bytes")
    return model

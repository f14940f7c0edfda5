"""Accuracy metrics and the multi-seed experiment runner.

The runner reproduces the report structure of the source experiments: for
each (training fraction, seed) it splits, trains, predicts, refines inside
superpixels (computed once per dataset and shared), and scores both the raw
and refined maps over test pixels, then aggregates mean +- sample std per
(dataset, method, fraction).
"""

from __future__ import annotations

import json
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as hio
from .classify import (
    FeatureConfig,
    Hyper,
    compute_band_stats,
    import_classmap,
    patch_means,
    predict,
    train_centroid,
    train_softmax,
)
from .core import ClassMap, HyperCube, LabelMap, PixelMask, validate
from .errors import DataError, DimensionMismatch, EmptyMask, LabelOutOfRange
from .refine import refine
from .sampling import SplitSpec, split
from .superpixel import SlicConfig, affinity_superpixels, slic


def overall_accuracy(pred: ClassMap, truth: LabelMap, mask: PixelMask) -> float:
    """Fraction of masked pixels whose prediction matches ground truth."""
    _check_dims(pred, truth, mask)
    sel = mask.mask
    total = int(sel.sum())
    if total == 0:
        raise EmptyMask("evaluation mask selects no pixels")
    t = truth.labels[sel]
    if (t == 0).any():
        raise LabelOutOfRange("evaluation mask selects unlabeled pixels")
    return int((pred.classes[sel] == t).sum()) / total


def confusion_and_kappa(pred: ClassMap, truth: LabelMap, mask: PixelMask):
    """C x C confusion matrix (rows = truth, cols = prediction) and Cohen's kappa.

    kappa = (p_o - p_e) / (1 - p_e) with p_e from the marginal products; the
    degenerate case p_e == 1 (single-class marginals in full agreement) is
    defined as kappa 0.
    """
    _check_dims(pred, truth, mask)
    sel = mask.mask
    total = int(sel.sum())
    if total == 0:
        raise EmptyMask("evaluation mask selects no pixels")
    t = truth.labels[sel].astype(np.int64)
    if (t == 0).any():
        raise LabelOutOfRange("evaluation mask selects unlabeled pixels")
    p = pred.classes[sel].astype(np.int64)
    c = truth.num_classes
    confusion = np.bincount((t - 1) * c + (p - 1), minlength=c * c).reshape(c, c)
    p_o = float(np.trace(confusion)) / total
    marg = float((confusion.sum(axis=1) * confusion.sum(axis=0)).sum())
    p_e = marg / (total * total)
    if p_e >= 1.0:
        return confusion, 0.0
    return confusion, (p_o - p_e) / (1.0 - p_e)


def _check_dims(pred: ClassMap, truth: LabelMap, mask: PixelMask) -> None:
    dims = (truth.height, truth.width)
    if (pred.height, pred.width) != dims:
        raise DimensionMismatch(
            f"prediction is {pred.height}x{pred.width}, truth is {dims[0]}x{dims[1]}"
        )
    if (mask.height, mask.width) != dims:
        raise DimensionMismatch(
            f"mask is {mask.height}x{mask.width}, truth is {dims[0]}x{dims[1]}"
        )
    if pred.num_classes != truth.num_classes:
        raise DimensionMismatch(
            f"prediction has {pred.num_classes} classes, truth has {truth.num_classes}"
        )


@dataclass(frozen=True, eq=False)
class RunRecord:
    dataset: str
    method: str
    train_fraction: float
    seed: int
    oa: float
    per_class_accuracy: np.ndarray
    kappa: float
    confusion: np.ndarray


@dataclass(frozen=True)
class ReportGroup:
    dataset: str
    method: str
    train_fraction: float
    runs: int
    oa_mean: float
    oa_std: float
    kappa_mean: float
    kappa_std: float
    oa_values: tuple


@dataclass(frozen=True)
class ReportTable:
    groups: tuple


def score(pred: ClassMap, truth: LabelMap, mask: PixelMask, dataset: str,
          method: str, fraction: float, seed: int) -> RunRecord:
    confusion, kappa = confusion_and_kappa(pred, truth, mask)
    total = int(confusion.sum())
    oa = float(np.trace(confusion)) / total
    rows = confusion.sum(axis=1)
    per_class = np.where(rows > 0, np.diag(confusion) / np.maximum(rows, 1), 0.0)
    return RunRecord(dataset, method, fraction, seed, oa, per_class, kappa, confusion)


def aggregate(records) -> ReportTable:
    """Group per-run records into mean +- sample std rows.

    Grouping preserves first-appearance order of (method, fraction); a single
    run yields std 0 by definition.
    """
    order = []
    grouped = {}
    for r in records:
        key = (r.dataset, r.method, r.train_fraction)
        if key not in grouped:
            grouped[key] = []
            order.append(key)
        grouped[key].append(r)
    groups = []
    for key in order:
        rs = grouped[key]
        oa = np.asarray([r.oa for r in rs], dtype=np.float64)
        kp = np.asarray([r.kappa for r in rs], dtype=np.float64)
        groups.append(ReportGroup(
            dataset=key[0], method=key[1], train_fraction=key[2], runs=len(rs),
            oa_mean=float(oa.mean()),
            oa_std=float(oa.std(ddof=1)) if len(rs) > 1 else 0.0,
            kappa_mean=float(kp.mean()),
            kappa_std=float(kp.std(ddof=1)) if len(rs) > 1 else 0.0,
            oa_values=tuple(float(v) for v in oa),
        ))
    return ReportTable(tuple(groups))


_CLASSIFIER_DEFAULTS = {
    "model": "softmax",
    "patch_radius": 2,
    "standardize": True,
    "epochs": 40,
    "batch_size": 16,
    "learning_rate": 0.001,
    "l2": 1e-4,
}

_SUPERPIXEL_DEFAULTS = {
    "method": "slic",
    "n": 10000,
    "compactness": 10.0,
    "iterations": 10,
    "seed": 0,
    "bands": None,
    "affinity": None,
}

_TOP_KEYS = {
    "dataset", "cube", "labels", "fractions", "seeds", "min_per_class",
    "classifier", "superpixels", "classmap", "save_maps", "render_maps",
}


def load_config(path) -> dict:
    """Parse and validate an experiment config (JSON), filling defaults.

    Relative paths are resolved against the config file's directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DataError(f"config {path} must hold a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise DataError(f"config {path}: unknown keys {sorted(unknown)}")
    for key in ("dataset", "cube", "labels", "fractions", "seeds"):
        if key not in raw:
            raise DataError(f"config {path}: missing required key {key!r}")

    base = path.parent
    cfg = {
        "dataset": str(raw["dataset"]),
        "cube": str((base / raw["cube"]).resolve()),
        "labels": str((base / raw["labels"]).resolve()),
        "fractions": [float(f) for f in raw["fractions"]],
        "seeds": [int(s) for s in raw["seeds"]],
        "min_per_class": int(raw.get("min_per_class", 1)),
        "classifier": {**_CLASSIFIER_DEFAULTS, **raw.get("classifier", {})},
        "superpixels": {**_SUPERPIXEL_DEFAULTS, **raw.get("superpixels", {})},
        "classmap": str((base / raw["classmap"]).resolve()) if raw.get("classmap") else None,
        "save_maps": bool(raw.get("save_maps", False)),
        "render_maps": bool(raw.get("render_maps", False)),
    }
    bad = set(cfg["classifier"]) - set(_CLASSIFIER_DEFAULTS)
    if bad:
        raise DataError(f"config {path}: unknown classifier keys {sorted(bad)}")
    bad = set(cfg["superpixels"]) - set(_SUPERPIXEL_DEFAULTS)
    if bad:
        raise DataError(f"config {path}: unknown superpixel keys {sorted(bad)}")
    if cfg["superpixels"]["affinity"]:
        cfg["superpixels"]["affinity"] = str((base / cfg["superpixels"]["affinity"]).resolve())
    if not cfg["fractions"] or not cfg["seeds"]:
        raise DataError(f"config {path}: fractions and seeds must be non-empty")
    return cfg


@dataclass
class _Prepared:
    """Per-dataset state shared by every run (read-only once built)."""

    cfg: dict
    cube: HyperCube
    labels: LabelMap
    superpixels: object
    feats_raw: np.ndarray
    imported: ClassMap | None = None
    out_dir: Path | None = None


_CONTEXT: _Prepared | None = None


def _build_superpixels(cfg: dict, cube: HyperCube):
    sp_cfg = cfg["superpixels"]
    if sp_cfg["method"] == "slic":
        bands = sp_cfg["bands"] or hio.default_rgb_bands(cube.bands)
        rgb = hio.cube_to_rgb(cube, *bands)
        return slic(rgb, SlicConfig(n=int(sp_cfg["n"]),
                                    compactness=float(sp_cfg["compactness"]),
                                    iterations=int(sp_cfg["iterations"]),
                                    seed=int(sp_cfg["seed"])))
    if sp_cfg["method"] == "affinity":
        if not sp_cfg["affinity"]:
            raise DataError("superpixel method 'affinity' requires an affinity file")
        aff = hio.read_affinity(sp_cfg["affinity"])
        if (aff.height, aff.width) != (cube.height, cube.width):
            raise DimensionMismatch("affinity raster dimensions do not match cube")
        return affinity_superpixels(aff, int(sp_cfg["n"]), seed=int(sp_cfg["seed"]))
    raise DataError(f"unknown superpixel method {sp_cfg['method']!r}")


def prepare(cfg: dict, out_dir=None) -> _Prepared:
    cube = hio.read_cube(cfg["cube"])
    labels = hio.read_labels(cfg["labels"])
    validate(cube, labels)
    cls = cfg["classifier"]
    prep = _Prepared(
        cfg=cfg,
        cube=cube,
        labels=labels,
        superpixels=_build_superpixels(cfg, cube),
        feats_raw=patch_means(cube, int(cls["patch_radius"])),
        imported=import_classmap(cfg["classmap"], labels) if cfg["classmap"] else None,
        out_dir=Path(out_dir) if out_dir else None,
    )
    return prep


def _fraction_tag(fraction: float) -> str:
    return repr(fraction).replace(".", "p")


def run_single(prep: _Prepared, fraction: float, seed: int) -> list[RunRecord]:
    cfg = prep.cfg
    cls = cfg["classifier"]
    fcfg = FeatureConfig(patch_radius=int(cls["patch_radius"]),
                         standardize=bool(cls["standardize"]))
    train_mask, test_mask = split(prep.labels,
                                  SplitSpec(fraction=fraction, seed=seed,
                                            min_per_class=cfg["min_per_class"]))
    feats = prep.feats_raw
    stats = None
    if fcfg.standardize:
        stats = compute_band_stats(prep.cube, train_mask)
        feats = (feats - stats.mean.astype(np.float64)) / stats.std.astype(np.float64)

    if cls["model"] == "softmax":
        hyper = Hyper(learning_rate=float(cls["learning_rate"]), epochs=int(cls["epochs"]),
                      batch_size=int(cls["batch_size"]), l2=float(cls["l2"]), seed=seed)
        model = train_softmax(feats, prep.labels, train_mask, hyper, fcfg, stats)
    elif cls["model"] == "centroid":
        model = train_centroid(feats, prep.labels, train_mask, fcfg, stats)
    else:
        raise DataError(f"unknown classifier model {cls['model']!r}")
    # predictions flow through the f32 stored weights, matching the CLI path
    dims = (prep.labels.height, prep.labels.width)
    z = predict(model, feats, dims)
    y = refine(z, prep.superpixels)

    ds = cfg["dataset"]
    records = [
        score(z, prep.labels, test_mask, ds, "raw", fraction, seed),
        score(y, prep.labels, test_mask, ds, "refined", fraction, seed),
    ]
    if prep.imported is not None:
        yi = refine(prep.imported, prep.superpixels)
        records.append(score(prep.imported, prep.labels, test_mask, ds, "imported",
                             fraction, seed))
        records.append(score(yi, prep.labels, test_mask, ds, "imported+refined",
                             fraction, seed))

    if prep.out_dir is not None and cfg["save_maps"]:
        tag = f"{ds}_f{_fraction_tag(fraction)}_s{seed}"
        hio.write_classmap(z, prep.out_dir / f"{tag}_raw.hsp")
        hio.write_classmap(y, prep.out_dir / f"{tag}_refined.hsp")
    if prep.out_dir is not None and cfg["render_maps"]:
        tag = f"{ds}_f{_fraction_tag(fraction)}_s{seed}"
        (prep.out_dir / f"{tag}_refined.png").write_bytes(hio.render_class_map(y))
    return records


def _worker(args):
    fraction, seed = args
    return run_single(_CONTEXT, fraction, seed)


def run_experiment(cfg: dict, out_dir, threads: int = 1) -> ReportTable:
    """Execute the full (fraction x seed) grid and write runs.csv / summary.csv.

    Output is independent of `threads`: results are reassembled in config
    order before aggregation and writing.
    """
    global _CONTEXT
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    prep = prepare(cfg, out_dir)
    tasks = [(f, s) for f in cfg["fractions"] for s in cfg["seeds"]]

    # workers see the prepared dataset through fork-inherited module state;
    # without fork (or with one task) runs execute sequentially instead
    can_fork = "fork" in multiprocessing.get_all_start_methods()
    if threads > 1 and len(tasks) > 1 and can_fork:
        _CONTEXT = prep
        try:
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as pool:
                results = list(pool.map(_worker, tasks))
        finally:
            _CONTEXT = None
    else:
        results = [run_single(prep, f, s) for (f, s) in tasks]

    records = [r for batch in results for r in batch]
    table = aggregate(records)
    hio.write_runs_csv(records, out_dir / "runs.csv")
    hio.write_summary_csv(table, out_dir / "summary.csv")
    return table

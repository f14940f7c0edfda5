"""Command-line interface.

One executable, one subcommand per pipeline stage. Exit codes: 0 success,
1 usage error, 2 data error, 3 numerical failure. Structured errors go to
stderr; machine-readable results (JSON, CSV paths) go to stdout. All
randomness is controlled by explicit --seed flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import io as hio
from .classify import (
    FeatureConfig,
    Hyper,
    compute_band_stats,
    extract_features,
    predict,
    read_model,
    train_centroid,
    train_softmax,
    write_model,
)
from .core import validate
from .errors import HsiError, NumericalError, UsageError
from .evaluate import (
    confusion_and_kappa,
    load_config,
    overall_accuracy,
    run_experiment,
)
from .refine import pin_training_labels, refine, refinement_delta
from .sampling import SplitSpec, split
from .superpixel import SlicConfig, affinity_superpixels, slic


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_bands(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"--bands expects three comma-separated indices, got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"--bands expects integers, got {text!r}") from exc


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("HSI_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"HSI_THREADS must be an integer, got {env!r}") from exc
    return 1


def _emit(obj) -> None:
    print(json.dumps(obj))


def cmd_convert_check(args) -> int:
    cube = hio.read_cube(args.cube)
    labels = hio.read_labels(args.labels)
    validate(cube, labels)
    counts = labels.class_counts()
    _emit({
        "cube": {"height": cube.height, "width": cube.width, "bands": cube.bands,
                 "name": cube.name},
        "labels": {"height": labels.height, "width": labels.width,
                   "num_classes": labels.num_classes,
                   "unlabeled": int(counts[0]),
                   "per_class": {str(c): int(counts[c]) for c in range(1, labels.num_classes + 1)}},
        "ok": True,
    })
    return 0


def cmd_split(args) -> int:
    labels = hio.read_labels(args.labels)
    spec = SplitSpec(fraction=args.fraction, seed=args.seed,
                     stratified=not args.no_stratify, min_per_class=args.min_per_class)
    train, test = split(labels, spec)
    hio.write_mask(train, args.train_out)
    hio.write_mask(test, args.test_out)
    _emit({"train_pixels": train.count(), "test_pixels": test.count(),
           "labeled_pixels": train.count() + test.count(),
           "train_out": str(args.train_out), "test_out": str(args.test_out)})
    return 0


def cmd_train(args) -> int:
    cube = hio.read_cube(args.cube)
    labels = hio.read_labels(args.labels)
    validate(cube, labels)
    train_mask = hio.read_mask(args.train_mask)
    config = FeatureConfig(patch_radius=args.patch_radius,
                           standardize=not args.no_standardize)
    stats = compute_band_stats(cube, train_mask) if config.standardize else None
    feats = extract_features(cube, config, stats)
    if args.model == "softmax":
        hyper = Hyper(learning_rate=args.lr, epochs=args.epochs,
                      batch_size=args.batch_size, l2=args.l2, seed=args.seed)
        model = train_softmax(feats, labels, train_mask, hyper, config, stats)
        extra = {"initial_loss": model.initial_loss, "final_loss": model.final_loss}
    else:
        model = train_centroid(feats, labels, train_mask, config, stats)
        extra = {}
    write_model(model, args.output)
    _emit({"model": args.model, "num_classes": model.num_classes,
           "output": str(args.output), **extra})
    return 0


def cmd_predict(args) -> int:
    cube = hio.read_cube(args.cube)
    model = read_model(args.model)
    feats = extract_features(cube, model.config, model.stats)
    z = predict(model, feats, (cube.height, cube.width))
    hio.write_classmap(z, args.output)
    _emit({"output": str(args.output), "num_classes": z.num_classes})
    return 0


def cmd_superpixels(args) -> int:
    if args.method == "slic":
        if not args.cube:
            raise UsageError("--method slic requires --cube")
        cube = hio.read_cube(args.cube)
        bands = _parse_bands(args.bands) if args.bands else hio.default_rgb_bands(cube.bands)
        rgb = hio.cube_to_rgb(cube, *bands)
        sp = slic(rgb, SlicConfig(n=args.n, compactness=args.compactness,
                                  iterations=args.iters, seed=args.seed))
    else:
        if not args.affinity:
            raise UsageError("--method affinity requires --affinity")
        aff = hio.read_affinity(args.affinity)
        sp = affinity_superpixels(aff, args.n, seed=args.seed)
        rgb = None
    hio.write_superpixels(sp, args.output)
    if args.overlay:
        base = rgb if args.method == "slic" else None
        Path(args.overlay).write_bytes(hio.render_boundaries(sp, base))
    _emit({"output": str(args.output), "num_segments": sp.num_segments})
    return 0


def cmd_refine(args) -> int:
    z = hio.read_classmap(args.classmap)
    sp = hio.read_superpixels(args.superpixels)
    if args.pin_train:
        if not (args.labels and args.train_mask):
            raise UsageError("--pin-train requires --labels and --train-mask")
        truth = hio.read_labels(args.labels)
        z = pin_training_labels(z, truth, hio.read_mask(args.train_mask))
    y = refine(z, sp)
    hio.write_classmap(y, args.output)
    result = {"output": str(args.output),
              "changed_pixels": int((z.classes != y.classes).sum())}
    if args.labels and args.test_mask:
        truth = hio.read_labels(args.labels)
        delta = refinement_delta(z, y, truth, hio.read_mask(args.test_mask), sp)
        report = delta.to_dict()
        report.pop("per_segment_flips", None)
        result["delta"] = report
        if args.report:
            Path(args.report).write_text(
                json.dumps(delta.to_dict(), indent=2) + "\n", encoding="utf-8")
            result["report"] = str(args.report)
    _emit(result)
    return 0


def cmd_evaluate(args) -> int:
    pred = hio.read_classmap(args.pred)
    truth = hio.read_labels(args.labels)
    mask = hio.read_mask(args.mask)
    oa = overall_accuracy(pred, truth, mask)
    confusion, kappa = confusion_and_kappa(pred, truth, mask)
    out = {"oa": oa, "kappa": kappa, "test_pixels": int(confusion.sum())}
    if args.confusion:
        out["confusion"] = confusion.tolist()
    _emit(out)
    return 0


def cmd_render(args) -> int:
    path = Path(args.input)
    suffix = path.suffix.lower()
    if suffix == ".hsc":
        cube = hio.read_cube(path)
        bands = _parse_bands(args.bands) if args.bands else hio.default_rgb_bands(cube.bands)
        png = hio.encode_png(hio.cube_to_rgb(cube, *bands).pixels)
    elif suffix == ".hsl":
        png = hio.render_label_map(hio.read_labels(path))
    elif suffix == ".hsp":
        png = hio.render_class_map(hio.read_classmap(path))
    elif suffix == ".hss":
        png = hio.render_boundaries(hio.read_superpixels(path))
    else:
        raise UsageError(f"cannot render {path}: unknown suffix {suffix!r}")
    Path(args.output).write_bytes(png)
    _emit({"output": str(args.output), "bytes": len(png)})
    return 0


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    table = run_experiment(cfg, args.out_dir, threads=_threads(args))
    _emit({
        "out_dir": str(args.out_dir),
        "runs_csv": str(Path(args.out_dir) / "runs.csv"),
        "summary_csv": str(Path(args.out_dir) / "summary.csv"),
        "groups": [
            {"dataset": g.dataset, "method": g.method, "fraction": g.train_fraction,
             "runs": g.runs, "oa_mean": g.oa_mean, "oa_std": g.oa_std}
            for g in table.groups
        ],
    })
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="hsikit",
                     description="Hyperspectral classification with superpixel vote refinement")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker cap for multi-run commands (fallback: HSI_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert-check", help="validate a cube/label file pair")
    p.add_argument("--cube", required=True)
    p.add_argument("--labels", required=True)
    p.set_defaults(func=cmd_convert_check)

    p = sub.add_parser("split", help="seeded stratified train/test split")
    p.add_argument("--labels", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--min-per-class", type=int, default=1)
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a baseline classifier")
    p.add_argument("--cube", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--train-mask", required=True)
    p.add_argument("--model", choices=("centroid", "softmax"), default="softmax")
    p.add_argument("--patch-radius", type=int, default=2)
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict a full classification map")
    p.add_argument("--cube", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("superpixels", help="generate a superpixel map")
    p.add_argument("--method", choices=("slic", "affinity"), default="slic")
    p.add_argument("--cube")
    p.add_argument("--bands", help="comma-separated r,g,b band indices for slic")
    p.add_argument("--affinity")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--compactness", type=float, default=10.0)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--overlay", help="write a boundary-overlay PNG here")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_superpixels)

    p = sub.add_parser("refine", help="majority-vote refinement inside superpixels")
    p.add_argument("--classmap", required=True)
    p.add_argument("--superpixels", required=True)
    p.add_argument("--labels")
    p.add_argument("--test-mask")
    p.add_argument("--train-mask")
    p.add_argument("--pin-train", action="store_true",
                   help="substitute training labels into the map before voting")
    p.add_argument("--report", help="write the full delta report JSON here")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("evaluate", help="score a prediction over a mask")
    p.add_argument("--pred", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--confusion", action="store_true", help="include the confusion matrix")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("render", help="render a raster to PNG")
    p.add_argument("--input", required=True)
    p.add_argument("--bands", help="comma-separated r,g,b band indices for cubes")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("experiment", help="run a full multi-seed experiment from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except HsiError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Benchmark the compiled kernels against the pure-Python backend.

Both backends must return identical arrays; this script verifies that on
every workload while timing them. Run:

    python benchmarks/bench_kernels.py [--size 256] [--n 400] [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

from hsikit import kernels
from hsikit.core import RgbImage
from hsikit.simulate import synthetic_rgb
from hsikit.superpixel import rgb_to_lab


def _grid_centers(lab, h, w, n):
    spacing = math.sqrt(h * w / n)
    nx = max(1, int(math.floor(w / spacing + 0.5)))
    ny = max(1, int(math.floor(h / spacing + 0.5)))
    centers = []
    for j in range(ny):
        cy = int(math.floor((j + 0.5) * h / ny))
        for i in range(nx):
            cx = int(math.floor((i + 0.5) * w / nx))
            centers.append((lab[cy, cx, 0], lab[cy, cx, 1], lab[cy, cx, 2], cx, cy))
    return np.asarray(centers, dtype=np.float64), spacing


def _time(fn, repeat):
    best = math.inf
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=256, help="image side length")
    ap.add_argument("--n", type=int, default=400, help="superpixel count for SLIC")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    try:
        c = kernels.load_backend("c")
    except ImportError:
        print("compiled backend not available; build it first (pip install -e .)")
        return 1
    py = kernels.load_backend("python")

    h = w = args.size
    rng = np.random.default_rng(0)
    img = RgbImage(synthetic_rgb(h, w, seed=1))
    lab = rgb_to_lab(img)
    centers, spacing = _grid_centers(lab, h, w, args.n)
    wxy = (10.0 / spacing) ** 2
    offset = max(1, int(math.ceil(spacing)))

    rows = []

    def workload(name, run_c, run_py):
        tc, rc = _time(run_c, args.repeat)
        tp, rp = _time(run_py, args.repeat)
        if isinstance(rc, tuple):
            same = all(np.array_equal(a, b) for a, b in zip(rc, rp))
        else:
            same = np.array_equal(rc, rp)
        rows.append((name, tc, tp, tp / tc, same))

    workload(
        f"slic_iterate {h}x{w}, n={args.n}, 10 iters",
        lambda: c.slic_iterate(lab, centers.copy(), wxy, offset, 10),
        lambda: py.slic_iterate(lab, centers.copy(), wxy, offset, 10),
    )

    right = rng.random((h, w), dtype=np.float32)
    down = rng.random((h, w), dtype=np.float32)
    seeds = np.sort(rng.choice(h * w, size=args.n, replace=False)).astype(np.int64)
    workload(
        f"watershed_grow {h}x{w}, {args.n} seeds",
        lambda: c.watershed_grow(right, down, seeds),
        lambda: py.watershed_grow(right, down, seeds),
    )

    seg = rng.integers(0, 40, size=(h, w)).astype(np.int64)
    workload(
        f"label_components {h}x{w}, 40 values",
        lambda: c.label_components(seg),
        lambda: py.label_components(seg),
    )

    name_w = max(len(r[0]) for r in rows)
    print(f"{'workload':<{name_w}}  {'compiled':>10}  {'python':>10}  {'speedup':>8}  match")
    for name, tc, tp, speedup, same in rows:
        print(f"{name:<{name_w}}  {tc * 1e3:>8.1f}ms  {tp * 1e3:>8.1f}ms  "
              f"{speedup:>7.1f}x  {'yes' if same else 'NO'}")
    if not all(r[4] for r in rows):
        print("BACKEND MISMATCH DETECTED")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

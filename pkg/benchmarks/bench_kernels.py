"""Time the numba kernels against their pure-numpy twins.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is warmed up once (JIT compile) and then timed with
``timeit``; the best of ``--repeat`` runs is reported.
"""

import argparse
import sys
import timeit

import numpy as np

from tacsim.kernels import numba_impl, numpy_impl
from tacsim.render import gaussian_kernel


def cases():
    rng = np.random.default_rng(0)
    img = rng.random((240 + 70, 320 + 70))
    w = gaussian_kernel(71)
    gx, gy = rng.uniform(-3, 3, (2, 240, 320))
    rgb = rng.integers(0, 256, (240, 320, 3)).astype(np.float64)
    table = rng.random((65, 65, 3))
    pull = (1.0, 1.0, 0.104, 0.002, 0.05, 1e9, 0.8, 2.0, 1.0, 5.0, 40, np.zeros(2200))
    return {
        "correlate rows (k=71)": lambda m: m.correlate1d_valid(img, w, 1),
        "correlate cols (k=71)": lambda m: m.correlate1d_valid(img, w, 0),
        "lut accumulate": lambda m: m.lut_accumulate(gx, gy, rgb, 64, 3.0),
        "lut bilinear": lambda m: m.lut_bilinear(table, gx, gy, 3.0),
        "pull integrate (40 steps)": lambda m: m.pull_integrate(*pull),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if numba_impl is None:
        print("numba backend unavailable (disabled or not installed)", file=sys.stderr)
        return 1
    print(f"{'kernel':28s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, fn in cases().items():
        row = []
        for impl in (numpy_impl, numba_impl):
            fn(impl)
            t = timeit.Timer(lambda: fn(impl))
            n, _ = t.autorange()
            row.append(min(t.repeat(args.repeat, n)) / n * 1e3)
        print(f"{name:28s} {row[0]:10.3f} {row[1]:10.3f} {row[0] / row[1]:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

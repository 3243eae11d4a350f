"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N] [--json out.json]

Each kernel runs on the same inputs under both backends; outputs are
checked for equality before timings are reported.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from scibridges import _kernels_py
from scibridges.kernels import BACKEND

try:
    from scibridges import _ckernels
except ImportError:
    _ckernels = None


def lesion_like(shape, density, seed):
    rng = np.random.default_rng(seed)
    return (rng.random(shape) < density).astype(np.uint8)


def cases():
    for shape, density in [((32, 32, 32), 0.3), ((64, 64, 64), 0.3), ((128, 128, 64), 0.15), ((64, 64, 64), 0.6)]:
        mask = lesion_like(shape, density, 0)
        for conn in (6, 26):
            yield f"label_components {shape} p={density} c={conn}", "label_components", (mask, conn)
    for shape in [(64, 64), (256, 320)]:
        sc = np.zeros(shape, dtype=np.uint8)
        sc[shape[0] // 4 : 3 * shape[0] // 4, :] = 1
        les = lesion_like(shape, 0.1, 1) & sc
        yield f"bridge_row_counts {shape}", "bridge_row_counts", (sc, les)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def best_of(fn, args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)

    if _ckernels is None:
        print("compiled extension not built; only the numpy backend is available", file=sys.stderr)
    print(f"active backend: {BACKEND}")
    print(f"{'case':<48} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    rows = []
    for name, kernel, kargs in cases():
        t_py = best_of(getattr(_kernels_py, kernel), kargs, args.repeat)
        row = {"case": name, "numpy_s": t_py, "cython_s": None, "speedup": None}
        if _ckernels is not None:
            c_fn = getattr(_ckernels, kernel)
            if not same(c_fn(*kargs), getattr(_kernels_py, kernel)(*kargs)):
                print(f"MISMATCH in {name}", file=sys.stderr)
                return 1
            row["cython_s"] = best_of(c_fn, kargs, args.repeat)
            row["speedup"] = t_py / row["cython_s"]
        rows.append(row)
        c_ms = f"{row['cython_s'] * 1e3:10.3f}" if row["cython_s"] else f"{'-':>10}"
        sp = f"{row['speedup']:7.1f}x" if row["speedup"] else f"{'-':>8}"
        print(f"{name:<48} {t_py * 1e3:10.3f} {c_ms} {sp}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())

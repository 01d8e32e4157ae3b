"""Time the compiled core against the numpy fallback.

    python benchmarks/bench_core.py [--repeat 5]
"""
import argparse
import importlib
import timeit

import numpy as np


def cases(rng):
    m = 1 << 14
    w = np.full(m, 1.0 / m)
    f, g = rng.normal(size=m), rng.normal(size=m)
    rows = rng.normal(size=(16, 1 << 14))
    vecs = rng.normal(size=(256, 1024))
    w1k = np.full(1024, 1.0 / 1024)
    return {
        "weighted_dot  m=2^14": lambda c: c.weighted_dot(w, f, g),
        "fwht_rows     16 x 2^14": lambda c: c.fwht_rows(rows.copy()),
        "mgs           256 x 1024": lambda c: c.mgs(vecs, w1k, 1e-10),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    py = importlib.import_module("dimwall._pycore")
    try:
        cc = importlib.import_module("dimwall._ccore")
    except ImportError:
        cc = None
        print("compiled core not built; timing fallback only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        if cc is None:
            print(f"{name:28s} {t_py:12.2f}")
            continue
        t_cc = min(timeit.repeat(lambda: fn(cc), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:28s} {t_py:12.2f} {t_cc:14.2f} {t_py / t_cc:7.1f}x")


if __name__ == "__main__":
    main()

"""Benchmark the compiled distance kernels against the pure-python fallback.

Runs the three hot loops (profile function H, its inverse, and the
homogeneous gauge d0) over identical inputs on both backends, reports
best-of-N wall times and the speedup, and cross-checks that the two
implementations agree to a few ulp.  Exits nonzero on disagreement so
this doubles as a consistency check in environments without a compiler.

Usage: python3 benchmarks/bench_kernels.py [--size 200000] [--repeats 5]
"""

import argparse
import sys
import time

import numpy as np

from bbmlab import BACKEND
from bbmlab import _kernels_py as pure

try:
    from bbmlab import _kernels as compiled
except ImportError:
    compiled = None


def best_time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def rel_gap(a, b):
    scale = np.maximum(np.abs(a), 1e-300)
    return float(np.max(np.abs(a - b) / scale))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=20250815)
    args = ap.parse_args(argv)

    gen = np.random.Generator(np.random.Philox(args.seed))
    s = gen.uniform(-0.999999, 0.999999, args.size)
    t = gen.standard_cauchy(args.size) * 10.0  # heavy tails hit both solver charts
    x1 = gen.standard_normal(args.size) * np.exp(gen.uniform(-4, 4, args.size))
    x2 = gen.standard_normal(args.size) * np.exp(gen.uniform(-4, 4, args.size))
    x3 = gen.standard_normal(args.size) * np.exp(gen.uniform(-8, 8, args.size))

    cases = [
        ("h_profile", (s,), 1e-14),
        ("h_inverse", (t,), 1e-13),
        ("d0", (x1, x2, x3), 5e-14),
    ]

    print(f"active backend at import: {BACKEND}")
    print(f"array size {args.size}, best of {args.repeats}\n")
    print(f"{'kernel':<12} {'python':>10} {'compiled':>10} {'speedup':>8} {'max rel gap':>12}")

    failed = False
    for name, inputs, tol in cases:
        py_fn = getattr(pure, name)
        py_time = best_time(py_fn, inputs, args.repeats)
        if compiled is None:
            print(f"{name:<12} {py_time * 1e3:>8.1f}ms {'n/a':>10} {'n/a':>8} {'n/a':>12}")
            continue
        c_fn = getattr(compiled, name)
        c_time = best_time(c_fn, inputs, args.repeats)
        gap = rel_gap(np.asarray(py_fn(*inputs)), np.asarray(c_fn(*inputs)))
        flag = "" if gap <= tol else f"  EXCEEDS {tol:g}"
        if gap > tol:
            failed = True
        print(f"{name:<12} {py_time * 1e3:>8.1f}ms {c_time * 1e3:>8.1f}ms "
              f"{py_time / c_time:>7.1f}x {gap:>12.2e}{flag}")

    if compiled is None:
        print("\ncompiled extension not importable; timings are fallback-only")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

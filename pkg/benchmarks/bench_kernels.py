#!/usr/bin/env python3
"""Benchmark the compiled configuration-basis kernels against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--sites N] [--reps R]
"""

import argparse
import time

import numpy as np

from lrising import _kernels
from lrising._kernels import _core_np


def timeit(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sites", type=int, default=16)
    parser.add_argument("--reps", type=int, default=5)
    args = parser.parse_args()

    n = args.sites
    dim = 1 << n
    rng = np.random.default_rng(0)
    w = np.abs(rng.standard_normal((n, n)))
    w = np.ascontiguousarray(0.5 * (w + w.T))
    np.fill_diagonal(w, 0.0)
    x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    diag = rng.standard_normal(dim)
    out = np.empty(dim, dtype=np.complex128)

    print(f"sites = {n} (dimension {dim}), extension built: {_kernels.HAVE_EXTENSION}")
    rows = []

    t_np = timeit(lambda: _core_np.zz_quadratic(n, w), max(1, args.reps // 2))
    rows.append(("zz diagonal", "numpy", t_np))
    if _kernels.HAVE_EXTENSION:
        t_cy = timeit(lambda: _kernels._core_cy.zz_quadratic(n, w), args.reps)
        rows.append(("zz diagonal", "cython", t_cy))

    t_np = timeit(lambda: _core_np.matvec(x, diag, n, -0.25, out), args.reps)
    rows.append(("matvec", "numpy", t_np))
    if _kernels.HAVE_EXTENSION:
        t_cy = timeit(lambda: _kernels._core_cy.matvec(x, diag, n, -0.25, out),
                      args.reps)
        rows.append(("matvec", "cython", t_cy))

    print(f"{'kernel':<14}{'impl':<10}{'best time':<14}speedup")
    base = {}
    for name, impl, t in rows:
        if impl == "numpy":
            base[name] = t
        speed = base[name] / t
        print(f"{name:<14}{impl:<10}{t * 1e3:10.3f} ms  {speed:6.2f}x")


if __name__ == "__main__":
    main()

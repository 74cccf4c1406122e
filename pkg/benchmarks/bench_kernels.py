#!/usr/bin/env python3
"""Benchmark the compiled grid-scan kernels against the numpy fallback.

Workload mirrors the exhaustive equilibrium oracle at step 1 over
[0, 3000]: a full 2-axis scan (9M points) and a 3-axis scan reduced
through the innermost-axis lower envelope (9M envelope queries standing
in for 27G raw grid points).

Run:  python benchmarks/bench_kernels.py [--axis-points 3001] [--repeats 3]
"""

import argparse
import time

import numpy as np

from cocogen import kernels
from cocogen.kernels import build_lower_envelope, get_backend


def make_axes(m, n_axes, seed=0):
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0xB], dtype=np.uint64)))
    values = np.arange(m, dtype=np.float64)
    axes = []
    for _ in range(n_axes):
        alpha = rng.uniform(5.0, 25.0)
        beta = rng.uniform(0.3, 0.7)
        d_loc = rng.uniform(1000.0, 3000.0)
        eps = alpha * np.power(d_loc + values, -beta)
        g = np.exp(eps / 200.0)
        w = rng.uniform(1e-8, 1e-6)
        axes.append((g, w * values))
    return axes


def bench(fn, repeats):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--axis-points", type=int, default=3001)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    m = args.axis_points
    (g1, l1), (g2, l2), (g3, l3) = make_axes(m, 3)
    bg1 = np.exp(-1.0 / 20.0) * g1
    env = build_lower_envelope(g3, l3)

    names = kernels.available_backends()
    print(f"axis points: {m}; backends: {', '.join(names)}")
    print(f"{'kernel':<24} {'backend':<10} {'best time':>12} {'result':>28}")
    times = {}
    for name in names:
        backend = get_backend(name)
        t, r = bench(lambda: backend.argmin_2d(bg1, l1, g2, l2), args.repeats)
        times[("2d", name)] = t
        print(f"{'argmin_2d (full scan)':<24} {name:<10} {t:>10.4f} s {str(r[1:]):>28}")
    for name in names:
        backend = get_backend(name)
        t, r = bench(lambda: backend.argmin_3d(bg1, l1, g2, l2, env), args.repeats)
        times[("3d", name)] = t
        print(f"{'argmin_3d (envelope)':<24} {name:<10} {t:>10.4f} s {str(r[1:]):>28}")

    if "compiled" in names:
        for kind in ("2d", "3d"):
            speedup = times[(kind, "python")] / times[(kind, "compiled")]
            print(f"{kind} speedup (compiled vs python): {speedup:.1f}x")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Benchmark the compiled stepping kernel against the numpy fallback.

Times the single-step leapfrog update (the solver's hot loop) on synthetic
problems of several sizes and prints microseconds per step plus speedup.

Usage: python benchmarks/bench_kernels.py [--steps N]
"""

import argparse
import time

import numpy as np

from schwave.backend import BACKEND, available_backends


def make_problem(n, rng):
    s = np.linspace(-50, 50, n)
    v_curr = np.exp(-(s / 3.0) ** 2) * rng.uniform(0.5, 1.0, n)
    v_prev = v_curr * rng.uniform(0.98, 1.0, n)
    W = rng.uniform(0.0, 0.03, n)
    h = rng.uniform(0.0, 0.2, n)
    phi = np.exp(0.05 * s)
    return v_prev, v_curr, np.zeros(n), W, h, phi


def time_kernel(kernel, arrays, p, steps):
    # Fixed inputs (no buffer rotation): keeps the synthetic problem bounded
    # so no run drifts into inf/nan arithmetic and skews the timing.
    v_prev, v_curr, v_next, W, h, phi = arrays
    n = len(v_curr)
    dt = 0.9 * (100.0 / (n - 1))
    inv_ds2 = 1.0 / (100.0 / (n - 1)) ** 2
    kernel(v_prev, v_curr, v_next, W, h, phi, p, dt, inv_ds2, 1, n - 2)
    t0 = time.perf_counter()
    for _ in range(steps):
        kernel(v_prev, v_curr, v_next, W, h, phi, p, dt, inv_ds2, 1, n - 2)
    return (time.perf_counter() - t0) / steps * 1e6


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=300)
    args = parser.parse_args()

    backends = available_backends()
    rng = np.random.default_rng(11)
    print(f"default backend: {BACKEND}")
    print(f"{'n':>8} {'p':>5}" + "".join(f"{name + ' us/step':>18}"
                                         for name in backends)
          + ("  speedup" if len(backends) > 1 else ""))
    for n in (2_000, 20_000, 200_000):
        for p in (1.5, 2.0):
            arrays = make_problem(n, rng)
            times = {name: time_kernel(k, tuple(a.copy() for a in arrays), p,
                                       args.steps)
                     for name, k in backends.items()}
            row = f"{n:>8} {p:>5}" + "".join(f"{times[name]:>18.2f}"
                                             for name in backends)
            if "cython" in times and "numpy" in times:
                row += f"  {times['numpy'] / times['cython']:>7.1f}x"
            print(row)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Throughput comparison of the numba and numpy kernel backends.

Builds one large synthetic stream (default: two million samples swept
into twenty thousand token intervals), runs both backends for the
sample-sum and trapezoid kernels, and prints per-call times. The numba
path is warmed once so JIT compilation stays out of the numbers.

    python3 benchmarks/bench_kernels.py [--samples N] [--intervals K] [--repeat R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from wattlens import _kernels


def build_inputs(n_samples: int, n_intervals: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    sample_t = np.cumsum(rng.uniform(0.005, 0.015, size=n_samples))
    sample_p = rng.uniform(50.0, 400.0, size=n_samples)
    edges = np.linspace(sample_t[0], sample_t[-1], n_intervals + 1)
    return sample_t, sample_p, edges


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=2_000_000)
    parser.add_argument("--intervals", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    sample_t, sample_p, bounds = build_inputs(args.samples, args.intervals)
    print(
        f"samples={args.samples:,} intervals={args.intervals:,} "
        f"repeat={args.repeat} (best-of)"
    )

    kernels = {
        "sample-sums": lambda backend: _kernels.interval_sample_stats(
            sample_t, sample_p, bounds, backend=backend
        ),
        "trapezoid": lambda backend: _kernels.interval_trapezoid(
            sample_t, sample_p, bounds, backend=backend
        ),
    }

    for name, call in kernels.items():
        call("numba")  # warm the JIT cache
        t_numba = best_of(lambda: call("numba"), args.repeat)
        t_numpy = best_of(lambda: call("numpy"), args.repeat)
        ratio = t_numpy / t_numba if t_numba > 0 else float("inf")
        print(
            f"{name:12s}  numba {t_numba * 1e3:8.2f} ms   "
            f"numpy {t_numpy * 1e3:8.2f} ms   numpy/numba {ratio:5.2f}x"
        )

    s_nb, c_nb = _kernels.interval_sample_stats(sample_t, sample_p, bounds, backend="numba")
    s_np, c_np = _kernels.interval_sample_stats(sample_t, sample_p, bounds, backend="numpy")
    assert np.array_equal(c_nb, c_np) and np.array_equal(s_nb, s_np)
    print("backends agree on the benchmark workload")


if __name__ == "__main__":
    main()

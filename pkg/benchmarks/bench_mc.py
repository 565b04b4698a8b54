#!/usr/bin/env python3
"""Benchmark the Monte Carlo MSE chain: numba kernel vs NumPy fallback.

Times both backends on representative link sizes and prints the
throughput and speedup. The numba kernel is warmed first so JIT
compilation does not pollute the numbers.

Usage:
    python benchmarks/bench_mc.py [--samples N]
"""

import argparse
import time

import numpy as np

from ristx import (
    FadingParams,
    ScenarioGeometry,
    SystemConfig,
    generate_scenario,
    monte_carlo_mse,
    sample_phase_noise,
)
from ristx.backend import HAVE_NUMBA
from ristx.experiment import _random_feasible_state

CASES = [
    ("small (M=8, 4x2, d=2)", dict(m=8, n_t=4, n_r=2, d=2)),
    ("default (M=40, 8x4, d=4)", dict(m=40, n_t=8, n_r=4, d=4)),
    ("wide (M=128, 8x4, d=4)", dict(m=128, n_t=8, n_r=4, d=4)),
]


def time_backend(state, channels, config, samples, backend, repeats=3):
    best = float("inf")
    for i in range(repeats):
        rng = np.random.default_rng(1000 + i)
        t0 = time.perf_counter()
        monte_carlo_mse(state, channels, config, samples, rng, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=200_000)
    args = parser.parse_args()

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    if not HAVE_NUMBA:
        print("numba not available; timing the NumPy path only")

    print(f"samples per run: {args.samples}\n")
    print(f"{'case':28s} " + " ".join(f"{b:>12s}" for b in backends) + "   speedup")
    for label, dims in CASES:
        config = SystemConfig(**dims)
        rng = np.random.default_rng(7)
        channels = generate_scenario(config, ScenarioGeometry(), FadingParams(), rng)
        state = _random_feasible_state(config, rng, channels)
        if HAVE_NUMBA:  # warm the JIT cache before timing
            monte_carlo_mse(state, channels, config, 1_000, np.random.default_rng(0), backend="numba")
        times = {b: time_backend(state, channels, config, args.samples, b) for b in backends}
        rates = " ".join(f"{args.samples / times[b] / 1e6:9.2f} M/s" for b in backends)
        speedup = times["numpy"] / times["numba"] if HAVE_NUMBA else float("nan")
        print(f"{label:28s} {rates}   {speedup:6.2f}x")

    # the shared rejection sampler, for reference
    rng = np.random.default_rng(3)
    n = 2_000_000
    t0 = time.perf_counter()
    sample_phase_noise(20.0, n, rng)
    dt = time.perf_counter() - t0
    print(f"\nvectorized phase-noise sampler: {n / dt / 1e6:.1f} M samples/s")


if __name__ == "__main__":
    main()

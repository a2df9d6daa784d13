"""Numba vs numpy throughput for the Monte Carlo accept kernels.

Both backends consume identical uniform blocks, so besides the timing this
asserts the accept counts agree exactly.  Run directly:

    python3 benchmarks/benchmark_kernels.py [--trials N]
"""

import argparse
import time

import numpy as np

from entverify import kernels, mc
from entverify.ghz import GHZDiagonalState
from entverify.speedup import USE_NUMBA


def bench(label, fn, args, trials, repeats=5):
    fn(*args)  # warm-up (and numba compilation)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    rate = trials / best / 1e6
    print(f"  {label:<18} {best * 1e3:8.2f} ms   {rate:8.1f} M trials/s")
    return result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=1_000_000)
    args = ap.parse_args()
    trials = args.trials

    if not USE_NUMBA:
        print("numba backend disabled or unavailable; timing numpy only")

    # werner-full n = 9: q_aux = 1, thresholds from F = 0.9
    n, d = 9, 10
    e = (1 - 0.9) / 3
    u = mc.block_uniforms(0, 0, trials, n + 2)
    print(f"counter kernel, n = {n} ({trials} trials):")
    a = bench("numpy", kernels._counter_numpy, (u, n, d, d, 1.0, e, 2 * e), trials)
    if USE_NUMBA:
        b = bench("numba", kernels._counter_jit, (u, n, d, d, 1.0, e, 2 * e), trials)
        assert a == b, (a, b)

    print(f"baseline kernel, n = {n}:")
    a = bench("numpy", kernels._baseline_numpy, (u, n, 0.1), trials)
    if USE_NUMBA:
        b = bench("numba", kernels._baseline_jit, (u, n, 0.1), trials)
        assert a == b, (a, b)

    noise = GHZDiagonalState.single_error(3, 0.8, k=2, lambda0=0.05)
    classes = noise.error_classes()
    cum = np.cumsum([float(p) for p, _, _ in classes])
    shifts = np.array([[s % 8 for s in vec] for _, vec, _ in classes], dtype=np.int64)
    phases = np.array([f for _, _, f in classes], dtype=np.int64)
    ug = mc.block_uniforms(0, 0, trials, 4)
    print("ghz kernel, m = 3, n = 4:")
    a = bench("numpy", kernels._ghz_numpy, (ug, cum, shifts, phases, 8, True), trials)
    if USE_NUMBA:
        scratch = np.zeros(2, dtype=np.int64)
        b = bench(
            "numba", kernels._ghz_jit, (ug, cum, shifts, phases, 8, True, scratch), trials
        )
        assert a == b, (a, b)

    print("accept counts identical across backends")


if __name__ == "__main__":
    main()

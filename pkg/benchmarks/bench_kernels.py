#!/usr/bin/env python3
"""Benchmark the pooling kernels: numba JIT vs pure-numpy fallback.

Times the batched merge for each rule plus the log-likelihood gather at a
few tensor sizes and prints per-call latencies with the speedup ratio.
These calls dominate weight training, which evaluates the likelihood
thousands of times per run.

Usage:
    python benchmarks/bench_kernels.py [--repeats 200]
"""

import argparse
import time

import numpy as np

from mcpool import kernels

SIZES = [
    (431, 4, 4),      # synonym-scale: instances x modules x choices
    (2000, 4, 4),     # synthetic training default
    (2000, 13, 5),    # analogy-scale module count
    (20000, 13, 5),   # stress size
]

RULES = [
    ("mixture", kernels.RULE_MIXTURE),
    ("logarithmic", kernels.RULE_LOGARITHMIC),
    ("product", kernels.RULE_PRODUCT),
]


def time_call(fn, repeats):
    fn()  # warm (JIT compile / cache touch)
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200,
                        help="timed calls per measurement")
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "numba" not in backends:
        print("numba unavailable; only the numpy fallback can be timed")

    rng = np.random.default_rng(0)
    print(f"{'size (m,n,k)':>16} {'rule':>12} "
          + " ".join(f"{b + ' us':>12}" for b in backends)
          + ("   speedup" if len(backends) > 1 else ""))
    for m, n, k in SIZES:
        raw = rng.random((m, n, k)) + 1e-4
        probs = raw / raw.sum(axis=2, keepdims=True)
        weights = rng.uniform(0.1, 1.0, n)
        answers = rng.integers(0, k, m)
        for name, rule in RULES:
            per_backend = {}
            for backend in backends:
                def call(b=backend):
                    merged = kernels.merge_batch(rule, probs, weights, backend=b)
                    kernels.gather_log_sum(merged, answers, backend=b)
                per_backend[backend] = time_call(call, args.repeats)
            row = (f"{f'({m},{n},{k})':>16} {name:>12} "
                   + " ".join(f"{per_backend[b] * 1e6:12.1f}" for b in backends))
            if "numba" in per_backend and "numpy" in per_backend:
                row += f"   {per_backend['numpy'] / per_backend['numba']:7.1f}x"
            print(row)


if __name__ == "__main__":
    main()

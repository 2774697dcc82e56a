#!/usr/bin/env python3
"""Benchmark: compiled sampling kernels vs the pure-Python/numpy fallback.

Runs the same seeded batches through both backends, asserts the samples are
bit-identical, and reports wall time and speedup per statistic.

    python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

from treepath import _kernels_py
from treepath.model import RngSpec, rng_stream

try:
    from treepath import _kernels as compiled
except ImportError:
    compiled = None

CASES = [
    # (label, function, args, replicates, quick_replicates)
    ("theta (2, 24, p=0.72, supercritical walk)", "theta_sample", (2, 24, 0.72, 1 << 62), 400, 40),
    ("theta (2, 40, p=0.35, subcritical walk)", "theta_sample", (2, 40, 0.35, 1 << 62), 20000, 2000),
    ("longest_open (2, 14, p=0.3, full tree)", "longest_open_sample", (2, 14, 0.3), 300, 30),
    ("longest_increasing (2, 14, full tree)", "longest_increasing_sample", (2, 14), 300, 30),
    ("increasing_count (2, 12, k=4)", "increasing_count_sample", (2, 12, 4), 300, 30),
]


def run(backend, fn, args, replicates, seed=1234):
    start = time.perf_counter()
    out = [getattr(backend, fn)(rng_stream(RngSpec(seed, i)), *args) for i in range(replicates)]
    return time.perf_counter() - start, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller replicate counts")
    opts = parser.parse_args()
    if compiled is None:
        raise SystemExit("compiled extension not available; build without TREEPATH_NO_EXT")

    print(f"{'case':<45} {'replicates':>10} {'compiled':>10} {'python':>10} {'speedup':>8}")
    for label, fn, args, reps, quick_reps in CASES:
        reps = quick_reps if opts.quick else reps
        t_fast, fast = run(compiled, fn, args, reps)
        t_slow, slow = run(_kernels_py, fn, args, reps)
        assert fast == slow, f"backend mismatch on {label}"
        print(f"{label:<45} {reps:>10} {t_fast:>9.3f}s {t_slow:>9.3f}s {t_slow / t_fast:>7.1f}x")
    print("samples bit-identical across backends for every case")


if __name__ == "__main__":
    main()

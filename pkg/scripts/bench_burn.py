#!/usr/bin/env python3
"""Burn-kernel benchmark: compiled extension vs pure-Python fallback.

Two things matter for load generation:

  accuracy  - how closely wall time tracks the requested CPU time on an
              otherwise idle machine (single thread);
  scaling   - aggregate CPU consumed by N concurrent burner threads. The
              compiled kernel releases the GIL, so threads spread across
              cores; the pure fallback serializes on the interpreter lock
              and tops out near one core no matter how many threads spin.

Run: python scripts/bench_burn.py [--threads N] [--burn SECONDS]
"""

from __future__ import annotations

import argparse
import os
import threading
import time

from defaas.executor.kernels import BACKEND, burn_pure

try:
    from defaas.executor._burnkernel import burn_thread_cpu as burn_native
except ImportError:
    burn_native = None


def single_thread_accuracy(fn, target: float) -> float:
    t0 = time.perf_counter()
    fn(target)
    return time.perf_counter() - t0


def concurrent_throughput(fn, threads: int, target: float) -> tuple:
    """Returns (wall, aggregate cpu consumed / wall)."""
    cpu0 = time.process_time()
    t0 = time.perf_counter()
    pool = [threading.Thread(target=fn, args=(target,)) for _ in range(threads)]
    for t in pool:
        t.start()
    for t in pool:
        t.join()
    wall = time.perf_counter() - t0
    cpu = time.process_time() - cpu0
    return wall, cpu / wall


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--threads", type=int, default=min(4, os.cpu_count() or 2))
    parser.add_argument("--burn", type=float, default=0.25)
    args = parser.parse_args()

    kernels = [("pure", burn_pure)]
    if burn_native is not None:
        kernels.insert(0, ("native", burn_native))
    else:
        print("compiled kernel not built; benchmarking the fallback only\n")

    print(f"selected backend at import: {BACKEND}")
    print(f"cpus: {os.cpu_count()}, threads: {args.threads}, burn: {args.burn}s\n")
    print(f"{'kernel':<8} {'1-thread wall':>14} {'overhead':>9} {'N-thread wall':>14} {'cores used':>11}")
    for name, fn in kernels:
        wall1 = single_thread_accuracy(fn, args.burn)
        overhead = (wall1 - args.burn) / args.burn
        wall_n, cores = concurrent_throughput(fn, args.threads, args.burn)
        print(f"{name:<8} {wall1:>13.3f}s {overhead:>8.1%} {wall_n:>13.3f}s {cores:>11.2f}")
    print(
        "\ncores used ~= thread count means the kernel escapes the GIL;"
        "\ncores used ~= 1 means burns serialize and duty-cycle load caps at one core."
    )
    return 0


if __name__ == "__main__":
    import sys

    sys.exit(main())

#!/usr/bin/env python3
"""Benchmark the compiled persistence kernel against the pure-Python twin.

Times the hot path (distance matrix -> persistence pairs) on the workloads
the envelope machinery actually generates, plus one full permutation
ensemble per backend.

    python bench/benchmark.py [--quick]
"""
import argparse
import time

import numpy as np

from eccmark import _kernel
from eccmark.envelopes import random_labeling_ensemble
from eccmark.geometry import MarkedPointPattern, Window
from eccmark.filtration import stabilized_epsilon_max


def workloads(rng):
    out = []
    for n in (40, 80, 120):
        pts = rng.uniform(0, 10, (n, 2))
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        np.fill_diagonal(d, 0.0)
        marks = rng.uniform(0, 8, n)
        dm = d * np.exp(np.abs(marks[:, None] - marks[None, :]))
        out.append((f"euclidean n={n}", d, stabilized_epsilon_max(d)))
        out.append((f"mark-weighted n={n}", dm, stabilized_epsilon_max(dm)))
    return out


def time_call(fn, *args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="fewer repeats, skip the ensemble")
    args = ap.parse_args()
    repeats = 3 if args.quick else 10

    backends = _kernel.available_backends()
    print(f"backends: {', '.join(backends)} (selected: {_kernel.BACKEND})\n")
    rng = np.random.default_rng(0)
    rows = workloads(rng)

    header = f"{'workload':24s}" + "".join(f"{b:>14s}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for label, dm, eps in rows:
        times = [time_call(_kernel.get_backend(b).persistence_from_matrix, dm, eps,
                           repeats=repeats) for b in backends]
        line = f"{label:24s}" + "".join(f"{t * 1e3:11.2f} ms" for t in times)
        if len(times) == 2:
            line += f"{times[1] / times[0]:9.1f}x"
        print(line)

    if not args.quick:
        print("\npermutation ensemble, n=80, s=99:")
        pts = rng.uniform(0, 10, (80, 2))
        pattern = MarkedPointPattern(pts, rng.uniform(0, 8, 80), Window(0, 10, 0, 10))
        import eccmark._kernel as kmod
        for name in backends:
            impl = kmod.get_backend(name)
            saved = kmod.persistence_from_matrix
            kmod.persistence_from_matrix = impl.persistence_from_matrix
            try:
                t0 = time.perf_counter()
                random_labeling_ensemble(pattern, s=99, seed=1, threads=1)
                dt = time.perf_counter() - t0
            finally:
                kmod.persistence_from_matrix = saved
            print(f"  {name:10s} {dt:6.2f} s  ({99 / dt:.0f} curves/s)")


if __name__ == "__main__":
    main()

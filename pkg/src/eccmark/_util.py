"""Seed-stream discipline and deterministic worker mapping.

Every random draw in the package flows from a single user seed through
named PCG64 streams: ``SeedSequence(entropy=seed, spawn_key=(stream, *idx))``.
Replicas are therefore reproducible bit for bit and independent of how many
worker threads execute them.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

RNG_ID = "pcg64-seedseq"

# stream tags (spawn_key leaders)
STREAM_PERMUTATION = 1
STREAM_CSR_SIM = 2
STREAM_PATTERN = 3
STREAM_MARKS = 4
STREAM_REPLICATE = 5


def rng_for(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def resolve_threads(threads: int | None = None) -> int:
    env = os.environ.get("ECC_MARK_THREADS", "").strip()
    if env:  # the environment override beats the flag
        threads = int(env)
    if threads is None or threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def thread_map(fn, items, threads: int | None = None) -> list:
    """Map ``fn`` over ``items``; results ordered by index regardless of scheduling."""
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))

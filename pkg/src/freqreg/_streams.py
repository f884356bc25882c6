"""Seeded RNG streams and deterministic chunked fan-out.

Randomized work is split into fixed-size chunks. Chunk ``i`` always draws from
``SeedSequence([seed, i])``, so results do not depend on how many workers run
the chunks.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

SEED_ENV = "FREQREG_SEED"
WORKERS_ENV = "FREQREG_WORKERS"
DEFAULT_SEED = 0


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, DEFAULT_SEED))


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, 1)))


def stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def chunk_sizes(total: int, chunk: int) -> list[int]:
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunks(
    fn: Callable[[np.random.Generator, int], T],
    total: int,
    seed: int,
    chunk: int = 10_000,
    workers: int | None = None,
) -> list[T]:
    """Call ``fn(rng, size)`` once per chunk and return results in chunk order."""
    sizes = chunk_sizes(total, chunk)
    workers = default_workers() if workers is None else max(1, int(workers))

    def job(i: int) -> T:
        return fn(stream(seed, i), sizes[i])

    if workers == 1 or len(sizes) == 1:
        return [job(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, range(len(sizes))))


def map_ordered(fn: Callable[[T], object], items: Sequence[T], workers: int | None = None) -> list:
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

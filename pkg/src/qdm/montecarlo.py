"""Seed-deterministic chunking for Monte-Carlo runs.

Work is cut into fixed-size chunks, each with its own stream spawned from
one ``SeedSequence``.  Chunk results are returned in chunk order, so the
aggregate is identical for any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")


def make_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def chunk_sizes(total: int, chunk: int) -> list[int]:
    if chunk < 1:
        raise ValueError("chunk must be >= 1")
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunks(work: Callable[[int], T], count: int, threads: int = 1) -> list[T]:
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1 or count <= 1:
        return [work(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, range(count)))

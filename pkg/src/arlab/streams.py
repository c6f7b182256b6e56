"""Seeded, thread-count independent random streams.

Monte Carlo work is cut into fixed-size chunks. Chunk ``i`` always draws from
a Philox generator keyed by ``seed ^ i``, so the concatenated result depends
only on ``(seed, n)`` and never on how many workers evaluated the chunks.
The worker count is read from ``ARL_THREADS`` (default 1).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 15
_MASK64 = (1 << 64) - 1


def stream(seed: int, i: int) -> np.random.Generator:
    """Generator for stream ``i`` of ``seed``."""
    return np.random.Generator(np.random.Philox(key=(int(seed) ^ int(i)) & _MASK64))


def worker_count() -> int:
    raw = os.environ.get("ARL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def chunk_sizes(n: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(int(n), chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn, n: int, seed: int, chunk: int = CHUNK) -> list:
    """Apply ``fn(rng, size)`` to every chunk of ``n`` draws, in chunk order."""
    sizes = chunk_sizes(n, chunk)
    jobs = [(stream(seed, i), size) for i, size in enumerate(sizes)]
    workers = worker_count()
    if workers == 1 or len(jobs) == 1:
        return [fn(rng, size) for rng, size in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def map_ordered(fn, items) -> list:
    """``[fn(x) for x in items]``, fanned out over ``ARL_THREADS`` workers."""
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

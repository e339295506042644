"""Block-parallel Monte Carlo driver.

Work is cut into fixed-size blocks and block b always draws from
``stream.substream(b)``, so results do not depend on the thread count or on
the order in which blocks finish.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .subordinators import RngLike, RngStream, as_generator

DEFAULT_BLOCK = 1 << 14


def as_stream(rng: RngLike) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    gen = as_generator(rng)
    return RngStream(int(gen.integers(0, 2 ** 63 - 1)))


def default_threads() -> int:
    return os.cpu_count() or 1


def run_blocks(fn: Callable[[int, np.random.Generator], object], n: int, rng: RngLike,
               block: int = DEFAULT_BLOCK, threads: int | None = 1) -> list:
    """Call fn(block_size, generator) over ceil(n/block) blocks; results in block order."""
    stream = as_stream(rng)
    sizes = [min(block, n - s) for s in range(0, n, block)]
    jobs = [(size, stream.substream(b)) for b, size in enumerate(sizes)]
    call = lambda job: fn(job[0], job[1].generator())
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(jobs) == 1:
        return [call(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(call, jobs))

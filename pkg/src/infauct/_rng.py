"""Seed-stable substreams and block-wise Monte Carlo execution.

Every estimator draws randomness in fixed-size trial blocks.  Block ``b``
of a run with master seed ``s`` and stream id ``t`` uses the generator
seeded by ``SeedSequence(s, spawn_key=(t, b))``, so the uniforms consumed
by a block depend only on (seed, stream, block index, block size) and never
on scheduling.  Per-block partial results are merged in block-index order,
which makes every estimate bit-identical for any worker count.

The worker count is capped by the ``INFAUCT_THREADS`` environment variable
(default: available CPU count).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable

import numpy as np

from .errors import InputError

THREADS_ENV = "INFAUCT_THREADS"
DEFAULT_BLOCK_SIZE = 4096


def worker_count() -> int:
    """Worker cap: INFAUCT_THREADS if set, else the machine's CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise InputError(f"{THREADS_ENV} must be >= 1, got {value}")
    return value


def block_rng(seed: int, block_index: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for one trial block of one named stream."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block_index)))


def split_blocks(trials: int, block_size: int = DEFAULT_BLOCK_SIZE) -> list[int]:
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    if block_size < 1:
        raise InputError(f"block_size must be >= 1, got {block_size}")
    full, rem = divmod(trials, block_size)
    sizes = [block_size] * full
    if rem:
        sizes.append(rem)
    return sizes


def run_blocks(
    trials: int,
    seed: int,
    block_fn: Callable[[np.random.Generator, int], Any],
    stream: int = 0,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int | None = None,
) -> list[Any]:
    """Run ``block_fn(rng, count)`` over every block; results in block order.

    The block layout depends only on (trials, block_size), so the returned
    list is identical no matter how many threads executed the blocks.
    """
    sizes = split_blocks(trials, block_size)
    if workers is None:
        workers = worker_count()
    if workers <= 1 or len(sizes) == 1:
        return [block_fn(block_rng(seed, b, stream), cnt) for b, cnt in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=min(workers, len(sizes))) as pool:
        futures = [
            pool.submit(block_fn, block_rng(seed, b, stream), cnt)
            for b, cnt in enumerate(sizes)
        ]
        return [f.result() for f in futures]


def merge_mean_stderr(parts: list[tuple[float, float, int]]) -> tuple[float, float]:
    """Combine per-block (sum, sum of squares, count) into (mean, stderr).

    Sums are accumulated in block order so the result is reproducible.
    """
    total = sum(p[2] for p in parts)
    if total == 0:
        raise InputError("no trials to merge")
    s = 0.0
    s2 = 0.0
    for part in parts:
        s += part[0]
        s2 += part[1]
    mean = s / total
    if total < 2:
        return mean, 0.0
    var = max(0.0, (s2 - total * mean * mean) / (total - 1))
    return mean, math.sqrt(var / total)

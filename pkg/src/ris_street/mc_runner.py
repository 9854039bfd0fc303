"""Deterministic chunked Monte-Carlo execution.

Trials are partitioned into fixed-size chunks; chunk i draws from a random
stream spawned as SeedSequence(seed).spawn()[i], so results are reproducible
and independent of how chunks are scheduled across worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

DEFAULT_CHUNK = 1024

T = TypeVar("T")


def run_chunked(n_total: int, seed: int,
                worker: Callable[[np.random.Generator, int, int], T],
                threads: int = 1, chunk_size: int = DEFAULT_CHUNK) -> list[T]:
    """Run worker(gen, count, chunk_index) over n_total trials.

    Returns the per-chunk results in chunk order regardless of scheduling.
    """
    if n_total < 1:
        raise ValueError(f"n_total must be >= 1, got {n_total}")
    n_chunks = math.ceil(n_total / chunk_size)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    slots: list[T | None] = [None] * n_chunks

    def job(i: int) -> None:
        count = min(chunk_size, n_total - i * chunk_size)
        slots[i] = worker(np.random.default_rng(children[i]), count, i)

    if threads <= 1:
        for i in range(n_chunks):
            job(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(job, range(n_chunks)))
    return slots  # type: ignore[return-value]


def mean_and_stderr(values: np.ndarray) -> tuple[float, float]:
    """Sample mean and standard error (pairwise-summed, order-stable)."""
    n = values.size
    mean = float(np.mean(values))
    if n < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(n))


def binomial_stderr(successes: int, n: int) -> float:
    """Standard error of an empirical proportion (exact in the counts)."""
    if n < 2:
        return 0.0
    return math.sqrt(successes * (n - successes) / (n * n * (n - 1.0)))

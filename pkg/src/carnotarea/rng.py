"""Counter-based random streams and ordered parallel reduction.

Every chunk of work draws from its own Philox stream keyed by
``(seed, stream_id)``, and chunk results are combined in index order, so
outputs do not depend on how many workers run the chunks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

WORKERS_ENV = "CARNOTAREA_WORKERS"

T = TypeVar("T")


def stream(seed: int, stream_id: int) -> np.random.Generator:
    key = np.array([int(seed) % 2**64, int(stream_id) % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def ordered_map(fn: Callable[[int], T], n_tasks: int, workers: int | None = None) -> list[T]:
    """``[fn(0), ..., fn(n_tasks - 1)]``, possibly evaluated concurrently."""
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or n_tasks <= 1:
        return [fn(i) for i in range(n_tasks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_tasks)))


def split(total: int, chunk: int) -> Sequence[tuple[int, int]]:
    return [(start, min(start + chunk, total)) for start in range(0, total, chunk)]

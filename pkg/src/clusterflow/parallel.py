"""Order-preserving parallel map over replicas.

Every replica derives its own :class:`~clusterflow.rng.RngStream` from its
index, so results do not depend on the number of workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "CLUSTERFLOW_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    return max(1, int(threads))


def map_replicas(fn, count: int, threads: int | None = None) -> list:
    threads = resolve_threads(threads)
    if threads == 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))

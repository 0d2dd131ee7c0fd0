"""Order-preserving parallel map over independent work items."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def resolve_threads(threads: int | None) -> int:
    """``0``/``None`` means auto: ``SPCA_THREADS`` if set, else the CPU count."""
    if threads:
        return max(1, int(threads))
    env = os.environ.get("SPCA_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn, items, threads: int | None = 1) -> list:
    """``[fn(i) for i in items]``, computed in worker processes when ``threads > 1``.

    Results come back in input order, so outputs never depend on scheduling.
    """
    items = list(items)
    workers = min(resolve_threads(threads), len(items))
    if workers <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))

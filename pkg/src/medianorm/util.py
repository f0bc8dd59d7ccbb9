"""Small shared helpers."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from functools import partial


def worker_count() -> int:
    """Worker processes for parallelizable sweeps (MEDIANORM_WORKERS, default 1)."""
    try:
        return max(1, int(os.environ.get("MEDIANORM_WORKERS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items, *args):
    """Order-preserving map, optionally across processes.

    Results are identical for any worker count: work items carry their own
    seeds and the output order follows the input order.
    """
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(item, *args) for item in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(partial(_apply, fn, args), items))


def _apply(fn, args, item):
    return fn(item, *args)

"""Work-pool sizing shared by the Monte Carlo engine and the check suite.

Results are deterministic by construction (per-unit random streams, by-index
assembly, sorted report rows), so the pool size is purely a throughput knob.
``ENDOWRISK_THREADS`` caps it; the default is serial because the numeric
kernels are fine-grained and gain nothing from threads on small hosts.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

from .errors import ConfigError

T = TypeVar("T")


def thread_pool_size() -> int:
    env = os.environ.get("ENDOWRISK_THREADS")
    if env:
        try:
            size = int(env)
        except ValueError:
            raise ConfigError(f"ENDOWRISK_THREADS={env!r} is not an integer")
        if size < 1:
            raise ConfigError("ENDOWRISK_THREADS must be >= 1")
        return size
    return 1


def map_tasks(fn: Callable[[T], None], items: Sequence[T]) -> None:
    """Apply ``fn`` to every item, threaded when the pool allows it."""
    workers = thread_pool_size()
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fn, items))
    else:
        for item in items:
            fn(item)

"""Order-preserving fan-out for independent grid cells."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

from dslv.errors import DomainError


def default_jobs() -> int:
    """``DSLV_JOBS`` if set, else the number of available processors."""
    env = os.environ.get("DSLV_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"DSLV_JOBS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def run_ordered(func, cells: list, jobs: int = 1) -> list:
    """``[func(c) for c in cells]``, optionally on a process pool.

    Results always follow the order of ``cells``.
    """
    if jobs <= 1 or len(cells) <= 1:
        return [func(c) for c in cells]
    with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as pool:
        return list(pool.map(func, cells))

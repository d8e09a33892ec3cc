"""Deterministic first-hit scan over an ordered candidate list.

The parallel path chunks candidates through a process pool but always reports
the hit belonging to the earliest candidate in list order, so results never
depend on scheduling.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence, TypeVar

T = TypeVar("T")


def first_hit(
    candidates: Sequence[T],
    worker: Callable[[T], Optional[object]],
    jobs: int = 1,
) -> tuple[Optional[int], Optional[object]]:
    """Apply worker to candidates in order; return (index, result) of the first
    candidate whose result is not None, else (None, None)."""
    if jobs <= 1:
        for i, cand in enumerate(candidates):
            res = worker(cand)
            if res is not None:
                return i, res
        return None, None
    from concurrent.futures import ProcessPoolExecutor

    chunk = max(1, jobs) * 4
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        for start in range(0, len(candidates), chunk):
            block = candidates[start : start + chunk]
            for i, res in enumerate(ex.map(worker, block)):
                if res is not None:
                    return start + i, res
    return None, None

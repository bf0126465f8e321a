"""Order-preserving map over independent solves, capped by FAIRSCOPE_THREADS."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "FAIRSCOPE_THREADS"


def worker_count(requested: int | None = None) -> int:
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(ENV_VAR)
    if cap:
        try:
            n = min(n, int(cap))
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be an integer, got {cap!r}") from None
    return max(n, 1)


def pmap(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    items = list(items)
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))

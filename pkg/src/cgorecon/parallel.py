"""Bounded fan-out of independent work units, results returned in input order."""

import asyncio
import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from tqdm import tqdm

from .config import DEFAULT_WORKERS

T = TypeVar("T")
R = TypeVar("R")


async def _gather_bounded(
    work: Callable[[T], R], items: list[T], workers: int, desc: str | None, progress: bool
) -> list[R]:
    loop = asyncio.get_running_loop()
    semaphore = asyncio.Semaphore(workers)

    with ThreadPoolExecutor(max_workers=workers) as pool, tqdm(
        total=len(items), desc=desc, disable=not progress, leave=False
    ) as pbar:

        async def bounded(item: T) -> R:
            async with semaphore:
                result = await loop.run_in_executor(pool, work, item)
                pbar.update(1)
                return result

        return await asyncio.gather(*(bounded(item) for item in items))


def map_bounded(
    work: Callable[[T], R],
    items: Iterable[T],
    workers: int | None = None,
    desc: str | None = None,
    progress: bool = True,
) -> list[R]:
    """
    Runs `work` over `items` on at most `workers` threads. Each unit must be
    independent; aggregation order is the input order whatever the worker count.
    """
    items = list(items)
    workers = max(1, int(workers or DEFAULT_WORKERS))
    if workers == 1 or len(items) <= 1:
        return [work(item) for item in tqdm(items, desc=desc, disable=not progress, leave=False)]
    logging.debug(f"Fanning out {len(items)} units over {workers} workers")
    return asyncio.run(_gather_bounded(work, items, workers, desc, progress))

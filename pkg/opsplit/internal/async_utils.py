# SPDX-License-Identifier: MIT

import asyncio
import concurrent.futures
import logging
import os
import typing as t

from ..core.errors import InputError

__all__ = (
    "resolve_threads",
    "map_in_executor",
    "run_parallel",
)

_log = logging.getLogger(__name__)

_T = t.TypeVar("_T")
_R = t.TypeVar("_R")

THREADS_ENV = "OPSPLIT_THREADS"


def resolve_threads(threads: t.Optional[int] = None) -> int:
    """Number of worker threads; ``None`` reads ``OPSPLIT_THREADS`` and 0 means auto."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            threads = int(raw)
        except ValueError:
            raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}.")

    if threads < 0:
        raise InputError(f"thread count must be nonnegative, got {threads}.")

    if threads == 0:
        threads = os.cpu_count() or 1

    return threads


async def map_in_executor(
    func: t.Callable[[_T], _R], items: t.Sequence[_T], *, threads: int
) -> list[_R]:
    loop = asyncio.get_running_loop()

    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
        futures = [loop.run_in_executor(executor, func, item) for item in items]
        return list(await asyncio.gather(*futures))


def run_parallel(
    func: t.Callable[[_T], _R], items: t.Iterable[_T], *, threads: t.Optional[int] = None
) -> list[_R]:
    """Apply ``func`` to every item, results in input order."""
    items = list(items)
    workers = min(resolve_threads(threads), max(len(items), 1))

    if workers <= 1:
        return [func(item) for item in items]

    try:
        asyncio.get_running_loop()
    except RuntimeError:
        pass
    else:
        _log.debug("An event loop is already running, evaluating %d items serially.", len(items))
        return [func(item) for item in items]

    _log.debug("Evaluating %d items on %d threads.", len(items), workers)
    return asyncio.run(map_in_executor(func, items, threads=workers))

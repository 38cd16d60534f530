import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from soficlab.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Map over independent candidates; results keep the input order so merges stay deterministic."""
    threads = threads or settings.THREADS
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    logger.debug(f"Mapping {len(items)} candidates over {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, items))

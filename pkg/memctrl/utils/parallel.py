# File: memctrl/utils/parallel.py

from typing import Any, Callable, Iterable, List, Optional
import logging

from joblib import Parallel, delayed

from .. import settings

logger = logging.getLogger(__name__)


def parallel_map(func: Callable[[Any], Any], items: Iterable[Any], n_jobs: Optional[int] = None) -> List[Any]:
    """
    Apply func to every item and return the results in input order.

    Uses joblib threads; numpy releases the GIL inside the dot products that
    dominate the per-mode work. n_jobs defaults to MEMCTRL_THREADS.
    """
    items = list(items)
    jobs = n_jobs if n_jobs is not None else settings.THREADS

    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    logger.debug(f"parallel_map: {len(items)} items on {jobs} threads")
    return Parallel(n_jobs=jobs, prefer='threads')(delayed(func)(item) for item in items)

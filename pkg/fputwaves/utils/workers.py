"""
utils/workers.py

Fans independent per-point work (one μ of a sweep, one amplitude of a
continuation) out over joblib workers. Results come back in input order.
"""

import logging
from typing import Callable, Iterable, List, Optional

from joblib import Parallel, delayed

from fputwaves.config import settings

logger = logging.getLogger(__name__)


class SweepPool:
    def __init__(self, n_jobs: Optional[int] = None):
        self._n_jobs = n_jobs

    @property
    def n_jobs(self) -> int:
        return self._n_jobs if self._n_jobs is not None else settings.N_JOBS

    def configure(self, n_jobs: Optional[int]) -> None:
        if n_jobs is not None and n_jobs == 0:
            raise ValueError("n_jobs must be nonzero")
        self._n_jobs = n_jobs

    # ─── Mapping ─────────────────────────────────────────────────────────────

    def map(self, fn: Callable, items: Iterable, **kwargs) -> List:
        items = list(items)
        if not items:
            return []
        if self.n_jobs == 1 or len(items) == 1:
            return [fn(item, **kwargs) for item in items]
        logger.info("dispatching %d sweep points to %d workers", len(items), self.n_jobs)
        return Parallel(n_jobs=self.n_jobs)(delayed(fn)(item, **kwargs) for item in items)


pool = SweepPool()

"""
Batch evaluation of forward runs, serial or through a joblib worker pool.

Results always come back in task order and every task carries its own seed,
so sampler outputs do not depend on the number of workers.
"""

import zlib
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..config.settings import settings
from ..utils.logger import setup_logger

logger = setup_logger(__name__)


def task_seed(master: int, stream: str, *counters: int) -> Tuple[int, ...]:
    """
    Seed tuple for one task.

    Args:
        master: Master seed of the run.
        stream: Stream tag (e.g. "smc.proposal", "esmda.perturb").
        *counters: Iteration / slot / attempt counters.

    Returns:
        Tuple[int, ...]: Entropy accepted by ``numpy.random.default_rng``.
    """
    return (int(master), zlib.crc32(stream.encode("utf-8")), *(int(c) for c in counters))


def task_rng(master: int, stream: str, *counters: int) -> np.random.Generator:
    return np.random.default_rng(list(task_seed(master, stream, *counters)))


class Evaluator:
    """
    Runs batches of forward evaluations and counts them.

    Every task handed to ``map`` is one forward run; ``n_runs`` is the only
    forward-run counter the samplers and ledgers read.
    """

    def __init__(self, workers: Optional[int] = None, backend: Optional[str] = None):
        """
        Initialize the evaluator.

        Args:
            workers: Pool size; 1 evaluates in-process. Defaults to settings.WORKERS.
            backend: joblib backend name. Defaults to settings.JOBLIB_BACKEND.
        """
        self.workers = max(1, int(workers or settings.WORKERS))
        self.backend = backend or settings.JOBLIB_BACKEND
        self.n_runs = 0
        self.n_batches = 0

    def map(self, fn: Callable[..., Any], tasks: Sequence[Tuple[Any, ...]]) -> List[Any]:
        """
        Evaluate ``fn(*task)`` for every task.

        Args:
            fn: Forward closure; must be picklable when ``workers > 1``.
            tasks: Argument tuples, one per forward run.

        Returns:
            List: Results in task order.
        """
        tasks = list(tasks)
        if not tasks:
            return []
        if self.workers == 1 or len(tasks) == 1:
            results = [fn(*task) for task in tasks]
        else:
            results = Parallel(n_jobs=self.workers, backend=self.backend)(
                delayed(fn)(*task) for task in tasks
            )
        self.n_runs += len(tasks)
        self.n_batches += 1
        logger.debug(f"Evaluated batch of {len(tasks)} runs ({self.n_runs} total)")
        return list(results)

    def reset(self) -> None:
        self.n_runs = 0
        self.n_batches = 0

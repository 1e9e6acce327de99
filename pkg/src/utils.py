import logging
import os
import time
from contextlib import contextmanager

from joblib import Parallel, delayed

# Configure logging
logger = logging.getLogger(__name__)


@contextmanager
def phase_timer(phase, timings=None):
    """
    Log the wall time of a named phase.

    Args:
        phase (str): Phase name (train, cv, calibrate, predict, ...)
        timings (dict, optional): Accumulates seconds per phase when given
    """
    start = time.perf_counter()
    try:
        yield
    finally:
        elapsed = time.perf_counter() - start
        if timings is not None:
            timings[phase] = timings.get(phase, 0.0) + elapsed
        logger.info(f"Phase {phase} took {elapsed:.3f}s")


def default_n_jobs():
    """Worker count from MLC_N_JOBS, 1 when unset."""
    try:
        return max(1, int(os.environ.get("MLC_N_JOBS", "1")))
    except ValueError:
        logger.warning("Ignoring non-integer MLC_N_JOBS")
        return 1


def run_tasks(func, items, n_jobs=None):
    """
    Apply func to every item, possibly on a thread pool.

    Results come back in item order whatever the scheduling.

    Args:
        func (callable): Task body
        items (iterable): Task arguments, one per call
        n_jobs (int, optional): Worker threads, defaults to default_n_jobs()

    Returns:
        list: func(item) for each item, in order
    """
    items = list(items)
    n_jobs = n_jobs or default_n_jobs()
    if n_jobs == 1 or len(items) <= 1:
        return [func(item) for item in items]
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(func)(item) for item in items)

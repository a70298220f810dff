"""
pool
~~~~

Optional worker threads for embarrassingly parallel, read-only work such as
sampling a stress-strain curve.  The number of workers is read from the
environment variable `NETELAST_THREADS` (default 1, meaning no threads).
"""

import concurrent.futures as _futures
import logging
import os as _os

_logger = logging.getLogger(__name__)

ENVIRONMENT_VARIABLE = "NETELAST_THREADS"


def thread_count(environ=None):
    """Read the worker count from the environment.

    :param environ: Mapping to read from; defaults to `os.environ`.
    """
    if environ is None:
        environ = _os.environ
    value = environ.get(ENVIRONMENT_VARIABLE)
    if value is None or value.strip() == "":
        return 1
    try:
        count = int(value)
    except ValueError:
        raise ValueError("{} must be an integer, not '{}'".format(ENVIRONMENT_VARIABLE, value))
    if count < 1:
        raise ValueError("{} must be at least 1, not {}".format(ENVIRONMENT_VARIABLE, count))
    return count


def ordered_map(func, items, workers=None):
    """Apply `func` to each item, returning results in input order.

    :param workers: Number of threads; `None` reads :func:`thread_count`.
    """
    items = list(items)
    if workers is None:
        workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    _logger.debug("Mapping %s items over %s threads", len(items), workers)
    with _futures.ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))

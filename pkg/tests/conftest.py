import time
from functools import lru_cache

from manifold_kinetics.experiments import ExperimentOptions, run_suite


@lru_cache(maxsize=None)
def suite(command):
    """Run a suite once per session with default options; returns ``(result, seconds)``."""
    start = time.perf_counter()
    result = run_suite(command, ExperimentOptions())
    return result, time.perf_counter() - start

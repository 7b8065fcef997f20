import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from stadium_entropy.errors import ConfigError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV_VAR = "STADIUM_THREADS"

# Upward slack applied to floating bounds before comparing exact integers to them
BOUND_SLACK = 1e-9


def chunk_bounds(total: int, chunk_size: int) -> List[Tuple[int, int, int]]:
    """Split range(total) into (chunk_index, start, stop) triples.

    The split depends only on `total` and `chunk_size`, never on the number of
    workers, so per-chunk random streams stay the same whatever the parallelism.
    """
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be positive, got {chunk_size}")
    return [
        (index, start, min(start + chunk_size, total))
        for index, start in enumerate(range(0, total, chunk_size))
    ]


def chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    """An independent, reproducible random stream for one chunk of a sweep."""
    return np.random.default_rng(np.random.SeedSequence([seed, chunk_index]))


def visit_order(seed: int, total: int) -> np.ndarray:
    """A seeded permutation of range(total), drawn from its own stream."""
    return np.random.default_rng(np.random.SeedSequence([seed, total, 1])).permutation(
        total
    )


def parallel_map(
    func: Callable[[T], R], items: Sequence[T], threads: int = 1
) -> List[R]:
    """Map `func` over `items`, keeping input order.

    With threads > 1 the work is spread over a process pool; `func` and the
    items must then be picklable (module-level functions, frozen dataclasses).
    """
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug("Dispatching %d work items over %d workers", len(items), threads)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def resolve_threads(flag: Optional[int], configured: Optional[int] = None) -> int:
    """Worker count: command-line flag, then config value, then STADIUM_THREADS."""
    for value in (flag, configured):
        if value is not None:
            return _validate_threads(value, "threads")
    env_value = os.environ.get(THREADS_ENV_VAR)
    if env_value:
        try:
            return _validate_threads(int(env_value), THREADS_ENV_VAR)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got '{env_value}'")
    return 1


def _validate_threads(value: int, name: str) -> int:
    if int(value) < 1:
        raise ConfigError(f"{name} must be at least 1, got {value}")
    return int(value)


def int_le_bound(exact: int, bound: float, slack: float = BOUND_SLACK) -> bool:
    """Whether an exact integer is at most a floating bound widened by `slack`.

    Python compares int and float exactly, so no rounding happens on the
    integer side.
    """
    return exact <= bound * (1.0 + slack)


def merge_first_seen(target: dict, source: Iterable[Tuple[object, int]]) -> None:
    """Merge word -> first sample index maps, keeping the smallest index."""
    for key, index in source:
        current = target.get(key)
        if current is None or index < current:
            target[key] = index

"""Block-parallel enumeration over integer index ranges.

Used by the RLT lattice scan and the face/grid oracles. Results come back
in block order, so callers reduce them deterministically no matter how
many workers ran.
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar

DEFAULT_WORKERS = 4
DEFAULT_BLOCK_SIZE = 3 ** 8

T = TypeVar("T")


def threads_from_environment() -> Optional[int]:
    """Positive THREADS value from the environment, or None when unset or invalid."""
    raw = os.environ.get("THREADS")
    if not raw:
        return None
    try:
        value = int(raw)
        if value >= 1:
            return value
    except ValueError:
        pass
    logging.warning(f"Ignoring THREADS={raw!r}: expected a positive integer")
    return None


def enumeration_workers(configured: Optional[int] = None) -> int:
    """Worker count: the configured value when positive, else 4."""
    if configured is not None and int(configured) >= 1:
        return int(configured)
    return DEFAULT_WORKERS


def block_ranges(total: int, block_size: int = DEFAULT_BLOCK_SIZE) -> List[range]:
    return [range(start, min(start + block_size, total))
            for start in range(0, total, block_size)]


def map_blocks(func: Callable[[range], T], total: int,
               block_size: int = DEFAULT_BLOCK_SIZE,
               workers: Optional[int] = None) -> List[T]:
    """Apply ``func`` to consecutive index blocks covering ``range(total)``."""
    blocks = block_ranges(total, block_size)
    workers = enumeration_workers(workers)
    logging.debug(f"Enumerating {total} items in {len(blocks)} blocks with up to {workers} workers")
    if len(blocks) <= 1 or workers == 1:
        return [func(block) for block in blocks]
    with ThreadPoolExecutor(max_workers=min(workers, len(blocks))) as executor:
        return list(executor.map(func, blocks))

"""
Workers - Thread pool giới hạn và sinh seed theo chỉ số
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

logger = logging.getLogger("CoherenceKit.Workers")

THREADS_ENV_VAR = "COHERENCE_KIT_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def derive_rng(master_seed: int, index: int) -> np.random.Generator:
    """
    Generator độc lập cho task thứ `index` (counter-mode từ master seed).

    Kết quả chỉ phụ thuộc (master_seed, index), không phụ thuộc thứ tự chạy.
    """
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(index),)))


def thread_limit(requested: Optional[int] = None) -> int:
    """
    Số worker: tham số > env COHERENCE_KIT_THREADS > số CPU.
    """
    if requested is not None and requested > 0:
        return int(requested)
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw:
        try:
            value = int(raw)
            if value > 0:
                return value
            logger.warning(f"Ignoring non-positive {THREADS_ENV_VAR}={raw}")
        except ValueError:
            logger.warning(f"Ignoring invalid {THREADS_ENV_VAR}={raw!r}")
    return os.cpu_count() or 1


def run_ordered(task: Callable[[T], R], items: Sequence[T], threads: Optional[int] = None) -> List[R]:
    """
    Chạy task trên từng item, trả kết quả theo đúng thứ tự đầu vào.
    """
    workers = min(thread_limit(threads), max(1, len(items)))
    if workers == 1:
        return [task(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="CoherenceKitWorker") as pool:
        return list(pool.map(task, items))

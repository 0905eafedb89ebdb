"""
确定性并行重复执行器

把重复编号切成固定大小的块，按块并行计算，再按块编号顺序拼接结果
"""

from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from loguru import logger

from app.core.config import settings
from app.core.exceptions import DomainException

# 处理 [start, stop) 区间内重复的函数，返回长度为 stop - start 的数组（或其首维）
BlockWorker = Callable[[int, int], np.ndarray]


def replicate_blocks(reps: int, block_size: int | None = None) -> list[tuple[int, int]]:
    """把 [0, reps) 切分为固定块"""
    size = block_size or settings.BLOCK_SIZE
    return [(start, min(start + size, reps)) for start in range(0, reps, size)]


def run_replicates(
    worker: BlockWorker,
    reps: int,
    *,
    threads: int | None = None,
    block_size: int | None = None,
) -> np.ndarray:
    """
    执行 reps 次重复

    块的划分只依赖 reps 和 block_size；结果按块顺序拼接，因此输出与线程数无关

    Args:
        worker: 块计算函数
        reps: 重复次数
        threads: 工作线程数，默认取配置
        block_size: 块大小，默认取配置

    Returns:
        按重复编号排列的结果数组
    """
    if reps < 1:
        raise DomainException(msg="重复次数必须至少为 1", detail={"reps": reps})

    blocks = replicate_blocks(reps, block_size)
    workers = max(1, threads or settings.THREADS)
    logger.debug(f"run_replicates: reps={reps}, blocks={len(blocks)}, threads={workers}")

    if workers == 1 or len(blocks) == 1:
        results = [worker(start, stop) for start, stop in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda block: worker(*block), blocks))

    return np.concatenate(results, axis=0)

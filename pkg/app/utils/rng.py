"""
随机数种子派生

每个重复实验的生成器只由 (master_seed, stream, index) 决定，与线程数和执行顺序无关
"""

import numpy as np

from app.core.config import settings
from app.core.exceptions import ConfigException

# 同一主种子下的独立流编号
STREAM_SAMPLE_X = 0
STREAM_SAMPLE_Y = 1
STREAM_LIMIT = 2
STREAM_REPRESENTATION = 3
STREAM_NULL = 4


def resolve_seed(seed: int | None) -> int:
    """
    解析主种子：显式参数优先，其次 MSPACINGS_SEED

    Raises:
        ConfigException: 两者都未提供或为负数
    """
    value = seed if seed is not None else settings.SEED
    if value is None:
        raise ConfigException(msg="未提供随机种子：请使用 --seed 或设置 MSPACINGS_SEED")
    if value < 0:
        raise ConfigException(msg="随机种子必须为非负整数", detail={"seed": value})
    return int(value)


def make_rng(seed: int) -> np.random.Generator:
    """由单个种子构造生成器"""
    if seed < 0:
        raise ConfigException(msg="随机种子必须为非负整数", detail={"seed": seed})
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def replicate_rng(master_seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """
    第 index 次重复的独立生成器（计数器式派生）

    Args:
        master_seed: 主种子
        index: 重复编号
        stream: 流编号，区分同一次重复中的不同随机来源
    """
    if master_seed < 0:
        raise ConfigException(msg="随机种子必须为非负整数", detail={"seed": master_seed})
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(stream), int(index)))
    return np.random.default_rng(sequence)

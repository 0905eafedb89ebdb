"""
配置管理模块

使用 Pydantic Settings 管理运行配置，支持从 .env 文件和 MSPACINGS_* 环境变量加载
"""

from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """运行配置"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="MSPACINGS_",
        case_sensitive=True,
        extra="ignore",
    )

    # 随机数配置（--seed 未给出时的回退值）
    SEED: int | None = None
    THREADS: int = 1  # Monte Carlo 批次的工作线程数，不影响任何输出
    BLOCK_SIZE: int = 256  # 每个工作单元包含的重复次数

    # 日志配置
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Path | None = None

    # 临界值缓存目录（None 表示仅内存缓存）
    CACHE_DIR: Path | None = None

    # 网格配置
    MC_GRID: int = 1025  # 积分/取点泛函
    SUP_GRID: int = 4097  # 极限过程 sup 泛函
    IDENTITY_GRID: int = 4097  # 确定性算子恒等式

    # 分位数反演配置
    QUANTILE_TOL: float = 1e-12
    QUANTILE_MAX_ITER: int = 200
    MAX_ORDER: int = 20  # m 的上限

    # 检验配置
    MIN_ASYMPTOTIC_N: int = 500  # 低于该 N 时改用有限样本模拟临界值


# 创建全局配置实例
settings = Settings()

"""
日志中间件

记录每个命令的执行信息，包括命令名、耗时、结果状态等
"""

import sys
import time
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from loguru import logger

from app.core.exceptions import AppException


@contextmanager
def log_command(name: str) -> Iterator[None]:
    """
    记录命令执行日志

    Args:
        name: 子命令名称
    """
    # 记录开始时间
    start_time = time.perf_counter()
    logger.info(f"📨 {name} - started")

    try:
        yield
    except AppException as e:
        process_time = time.perf_counter() - start_time
        logger.warning(f"⚠️ {name} - {e.msg} - Time: {process_time:.3f}s")
        raise
    except Exception as e:
        process_time = time.perf_counter() - start_time
        logger.exception(f"❌ {name} - Error: {str(e)} - Time: {process_time:.3f}s")
        raise
    else:
        process_time = time.perf_counter() - start_time
        logger.info(f"✅ {name} - Time: {process_time:.3f}s")


def setup_logging(level: str = "INFO", log_file: Path | None = None) -> None:
    """
    配置 loguru 日志

    控制台输出写入 stderr，stdout 只保留命令结果

    Args:
        level: 日志级别
        log_file: 可选的日志文件路径
    """
    # 移除默认的 handler
    logger.remove()

    # 添加控制台输出（带颜色）
    logger.add(
        sink=sys.stderr,
        format=(
            "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
            "<level>{level: <8}</level> | "
            "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
            "<level>{message}</level>"
        ),
        level=level,
        colorize=True,
    )

    if log_file is None:
        return

    # 添加文件输出（所有日志）
    logger.add(
        str(log_file),
        rotation="100 MB",  # 文件大小达到 100MB 时轮转
        retention="30 days",  # 保留 30 天的日志
        compression="zip",  # 压缩旧日志
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} | {message}",
        level=level,
    )

    # 添加错误日志文件
    logger.add(
        str(log_file.with_name(f"{log_file.stem}.error{log_file.suffix}")),
        rotation="50 MB",
        retention="30 days",
        compression="zip",
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} | {message}",
        level="ERROR",
    )

    logger.debug("日志系统初始化完成")

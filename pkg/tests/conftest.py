"""
Pytest 配置和共享 fixtures

提供固定种子、小规模设计、参考路径和命令行调用辅助
"""

from collections.abc import Callable, Generator
from pathlib import Path

import numpy as np
import pytest
from loguru import logger

from app.core.config import settings
from app.main import dispatch
from app.schemas.design import SampleDesign
from app.schemas.samples import GridPath
from app.services.gausslim import LimitProcessService
from app.services.spacings import SpacingsService
from app.services.stest import CriticalValueCache


@pytest.fixture(scope="session")
def master_seed() -> int:
    """固定主种子"""
    return 20240917


@pytest.fixture(scope="function")
def small_design() -> SampleDesign:
    """n1 = 21, n2 = 35, m = 2 → N = 10, P = 0, Q = 7"""
    return SpacingsService.design_from_sizes(21, 35, 2)


@pytest.fixture(scope="session")
def reference_path() -> GridPath:
    """
    4097 点上的一条 B∘H_2 路径（会话级别）

    用于确定性算子恒等式
    """
    return LimitProcessService.simulate_limit_path(2, 0.0, settings.IDENTITY_GRID, seed=7)


@pytest.fixture(scope="function")
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def isolated_cache(monkeypatch: pytest.MonkeyPatch) -> Generator[None, None, None]:
    """每个测试使用空的临界值缓存，且默认不落盘"""
    monkeypatch.setattr(settings, "CACHE_DIR", None)
    CriticalValueCache.clear()
    yield
    CriticalValueCache.clear()


@pytest.fixture(scope="function")
def out_dir(tmp_path: Path) -> Path:
    """输出目录"""
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture(scope="function")
def run_cli(capsys: pytest.CaptureFixture[str]) -> Generator[Callable[..., tuple[int, str, str]], None, None]:
    """
    调用 dispatch 并返回 (退出码, stdout, stderr)
    """

    def _run(*argv: str) -> tuple[int, str, str]:
        code = dispatch(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    yield _run
    # dispatch 把 sink 绑定到了被捕获的 stderr，测试结束后移除
    logger.remove()

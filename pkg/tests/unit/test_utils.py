"""
工具模块测试

种子派生、确定性重复执行器与网格
"""

import numpy as np
import pytest

from app.core.config import settings
from app.core.exceptions import ConfigException, DomainException
from app.utils.grid import make_grid, resolve_grid, validate_grid
from app.utils.replicates import replicate_blocks, run_replicates
from app.utils.rng import STREAM_LIMIT, STREAM_SAMPLE_X, replicate_rng, resolve_seed

pytestmark = pytest.mark.unit


class TestSeeds:
    """种子解析与派生测试"""

    def test_explicit_seed_wins(self, monkeypatch: pytest.MonkeyPatch):
        """测试显式种子优先于环境配置"""
        monkeypatch.setattr(settings, "SEED", 5)
        assert resolve_seed(9) == 9
        assert resolve_seed(None) == 5

    def test_missing_seed(self, monkeypatch: pytest.MonkeyPatch):
        """测试两者都缺失"""
        monkeypatch.setattr(settings, "SEED", None)
        with pytest.raises(ConfigException):
            resolve_seed(None)

    def test_negative_seed(self):
        """测试负种子"""
        with pytest.raises(ConfigException):
            resolve_seed(-1)

    def test_streams_are_independent(self):
        """测试不同流、不同编号得到不同序列，相同参数得到相同序列"""
        a = replicate_rng(1, 0, STREAM_SAMPLE_X).random(4)
        b = replicate_rng(1, 0, STREAM_LIMIT).random(4)
        c = replicate_rng(1, 1, STREAM_SAMPLE_X).random(4)
        np.testing.assert_array_equal(a, replicate_rng(1, 0, STREAM_SAMPLE_X).random(4))
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestReplicates:
    """重复执行器测试"""

    def test_blocks(self):
        """测试块划分只依赖 reps 和 block_size"""
        assert replicate_blocks(10, 4) == [(0, 4), (4, 8), (8, 10)]
        assert replicate_blocks(4, 4) == [(0, 4)]

    def test_order_preserved(self):
        """测试结果按重复编号排列，与线程数无关"""

        def worker(start: int, stop: int) -> np.ndarray:
            return np.array([replicate_rng(3, i).random() for i in range(start, stop)])

        serial = run_replicates(worker, 1000, threads=1, block_size=64)
        parallel = run_replicates(worker, 1000, threads=4, block_size=64)
        np.testing.assert_array_equal(serial, parallel)
        assert serial.shape == (1000,)

    def test_zero_reps(self):
        """测试 reps = 0"""
        with pytest.raises(DomainException):
            run_replicates(lambda start, stop: np.zeros(stop - start), 0)


class TestGrid:
    """网格测试"""

    def test_default(self):
        """测试默认点数"""
        assert make_grid().size == settings.MC_GRID

    def test_too_few_points(self):
        """测试少于 3 个点"""
        with pytest.raises(DomainException):
            make_grid(2)

    def test_validate(self):
        """测试非递增网格"""
        with pytest.raises(DomainException):
            validate_grid([0.0, 0.5, 0.5, 1.0])

    def test_resolve_explicit(self):
        """测试显式网格必须包含端点"""
        np.testing.assert_array_equal(resolve_grid([0.0, 0.3, 1.0]), [0.0, 0.3, 1.0])
        with pytest.raises(DomainException):
            resolve_grid([0.0, 0.3, 0.9])
        assert resolve_grid(None, 17).size == 17

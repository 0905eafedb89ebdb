"""
间距服务测试

测试样本设计、不相交 m-间距、比值、经验分布函数与经验过程
"""

import math

import numpy as np
import pytest

from app.core.exceptions import ConfigException, DataException, DomainException
from app.schemas.design import SampleDesign, Unbounded
from app.schemas.samples import DisjointSpacings, RatioSample
from app.services.distkit import DistributionService
from app.services.spacings import SpacingsService

pytestmark = pytest.mark.unit


def _ratios(values: list[float], m: int = 1) -> RatioSample:
    """构造 N+1 = len(values) 的比值样本"""
    design = SpacingsService.design_from_counts(m, len(values) - 1, 0, 0)
    return RatioSample(ratios=values, design=design)


class TestDesign:
    """样本设计测试"""

    @pytest.mark.parametrize(
        "n1,n2,m,expected",
        [
            (99, 99, 1, (99, 99, 99, 0, 0)),
            (21, 35, 2, (10, 17, 10, 0, 7)),
            (5, 5, 6, (0, 0, 0, 0, 0)),
        ],
    )
    def test_from_sizes(self, n1: int, n2: int, m: int, expected: tuple[int, ...]):
        """测试由样本量计算设计"""
        design = SpacingsService.design_from_sizes(n1, n2, m)
        assert (design.N1, design.N2, design.N, design.P, design.Q) == expected

    def test_fixture_design(self, small_design: SampleDesign):
        """测试共享 fixture 的计数"""
        assert small_design.c_hat == 0.0
        assert small_design.d_hat == pytest.approx(7 / 11)

    def test_override(self):
        """测试显式 N"""
        design = SpacingsService.design_from_sizes(21, 35, 2, N_override=4)
        assert (design.N, design.P, design.Q) == (4, 6, 13)

    def test_override_too_large(self):
        """测试 N 超过 min(N1, N2)"""
        with pytest.raises(DomainException):
            SpacingsService.design_from_sizes(21, 35, 2, N_override=11)

    def test_order_out_of_range(self):
        """测试 m > n+1"""
        with pytest.raises(DomainException):
            SpacingsService.design_from_sizes(5, 5, 7)

    def test_from_counts_round_trip(self):
        """测试由 (N, P, Q) 反推样本量"""
        design = SpacingsService.design_from_counts(2, 10, 3, 5)
        assert (design.n1, design.n2) == (27, 31)
        assert (design.N, design.P, design.Q) == (10, 3, 5)

    def test_swapped(self, small_design: SampleDesign):
        """测试交换两样本角色"""
        swapped = small_design.swapped()
        assert (swapped.n1, swapped.n2, swapped.P, swapped.Q) == (35, 21, 7, 0)
        assert swapped.swapped() == small_design

    def test_resolve_from_regime(self):
        """测试由区域参数换算 P、Q"""
        design = SpacingsService.resolve_design(1, N=99, c=1.0, d=3.0)
        assert (design.P, design.Q) == (100, 300)

    def test_resolve_infinite_regime_requires_counts(self):
        """测试 c = ∞ 且未给出 P 时报配置错误"""
        with pytest.raises(ConfigException):
            SpacingsService.resolve_design(1, N=10, c=Unbounded.INF, d=0.0)
        design = SpacingsService.resolve_design(1, N=10, P=500, c=Unbounded.INF, d=0.0)
        assert design.P == 500

    def test_resolve_requires_size(self):
        """测试缺少 n1/n2 和 N"""
        with pytest.raises(ConfigException):
            SpacingsService.resolve_design(1)

    def test_resolve_sizes_with_regime(self):
        """测试给出样本量和区域参数时 N 的选取"""
        design = SpacingsService.resolve_design(1, n1=199, n2=399, c=1.0, d=3.0)
        assert design.N == 99
        assert design.P == 100
        assert design.Q == 300


class TestRegimeConstant:
    """有限样本区域常数测试"""

    def test_balanced(self):
        """测试 m=1, P=Q=0"""
        design = SpacingsService.design_from_counts(1, 50, 0, 0)
        assert SpacingsService.r_nm(design) == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_unbalanced(self):
        """测试 m=1, N+1=100, P=100, Q=300"""
        design = SpacingsService.design_from_counts(1, 99, 100, 300)
        assert SpacingsService.r_nm(design) == pytest.approx(0.75, abs=1e-15)

    def test_large_surplus(self):
        """测试 P、Q 远大于 N 时趋于 1"""
        assert SpacingsService.r_nm(SpacingsService.design_from_counts(2, 3, 10**6, 10**6)) > 0.9999

    def test_range(self):
        """测试 R 位于 [1/(2m+1), 1)"""
        for m in (1, 2, 3):
            value = SpacingsService.r_nm(SpacingsService.design_from_counts(m, 20, 7, 0))
            assert 1.0 / (2 * m + 1) <= value < 1.0


class TestSpacings:
    """不相交 m-间距测试"""

    def test_single_point(self):
        """测试一个点的 1-间距"""
        spacings = SpacingsService.disjoint_spacings([0.5], m=1, N=1)
        np.testing.assert_array_equal(spacings.values, [0.5, 0.5])

    def test_order_two(self):
        """测试 m=2 时隔点取差"""
        spacings = SpacingsService.disjoint_spacings([0.9, 0.2, 0.5], m=2, N=1)
        np.testing.assert_array_equal(spacings.values, [0.5, 0.5])
        assert spacings.source_n == 3

    def test_ties(self):
        """测试结值报数据错误"""
        with pytest.raises(DataException):
            SpacingsService.disjoint_spacings([0.2, 0.2, 0.9], m=1, N=2)

    def test_out_of_unit_interval(self):
        """测试样本越界"""
        with pytest.raises(DataException):
            SpacingsService.ordered_sample([0.2, 1.0])
        with pytest.raises(DataException):
            SpacingsService.ordered_sample([0.2, np.nan])

    def test_too_many_spacings(self):
        """测试 (N+1)m > n+1"""
        with pytest.raises(DomainException):
            SpacingsService.disjoint_spacings([0.1, 0.2, 0.3], m=2, N=2)

    def test_sum_to_one_when_full(self, rng: np.random.Generator):
        """测试 n+1 = (N+1)m 时间距之和为 1"""
        sample = rng.uniform(size=29)
        spacings = SpacingsService.disjoint_spacings(sample, m=3, N=9)
        assert spacings.count == 10
        assert float(np.sum(spacings.values)) == pytest.approx(1.0, abs=1e-14)

    def test_raw_units(self):
        """测试原始单位下以区间端点为哨兵"""
        spacings = SpacingsService.raw_spacings([3.0, 1.5, 2.0], lower=1.0, length=3.0, m=2, N=1)
        np.testing.assert_allclose(spacings.values, [1.0, 2.0])

    def test_raw_out_of_interval(self):
        """测试原始样本落在声明区间外"""
        with pytest.raises(DataException):
            SpacingsService.raw_spacings([0.5, 5.0], lower=1.0, length=3.0, m=1, N=1)


class TestRatios:
    """间距比值测试"""

    def test_identical_spacings(self):
        """测试两侧间距相同且 N1 = N2 时比值为 1/2"""
        design = SpacingsService.design_from_counts(1, 2, 0, 0)
        sx = DisjointSpacings(values=[0.2, 0.3, 0.5], m=1, source_n=2)
        ratios = SpacingsService.spacing_ratios(sx, sx, design)
        np.testing.assert_array_equal(ratios.ratios, [0.5, 0.5, 0.5])

    def test_weighted_by_counts(self):
        """测试 (N1+1)、(N2+1) 的加权"""
        design = SpacingsService.design_from_counts(1, 0, 3, 7)
        sx = DisjointSpacings(values=[0.2], m=1, source_n=3)
        sy = DisjointSpacings(values=[0.1], m=1, source_n=7)
        assert SpacingsService.spacing_ratios(sx, sy, design).ratios[0] == pytest.approx(0.5, abs=1e-15)

        design = SpacingsService.design_from_counts(1, 0, 1, 4)
        sx = DisjointSpacings(values=[0.3], m=1, source_n=1)
        sy = DisjointSpacings(values=[0.1], m=1, source_n=4)
        assert SpacingsService.spacing_ratios(sx, sy, design).ratios[0] == pytest.approx(6.0 / 11.0, abs=1e-15)

    def test_length_mismatch(self):
        """测试间距个数与设计不一致"""
        design = SpacingsService.design_from_counts(1, 1, 0, 0)
        sx = DisjointSpacings(values=[0.5], m=1, source_n=0)
        with pytest.raises(DomainException):
            SpacingsService.spacing_ratios(sx, sx, design)

    def test_swap_antisymmetry(self, rng: np.random.Generator):
        """测试交换 X、Y 后 R_k ↦ 1 - R_k"""
        x = rng.uniform(size=41)
        y = rng.uniform(size=63)
        forward = SpacingsService.ratios_from_samples(x, y, m=2)
        backward = SpacingsService.ratios_from_samples(y, x, m=2)
        assert backward.design == forward.design.swapped()
        np.testing.assert_allclose(backward.ratios, 1.0 - forward.ratios, atol=1e-15)

    def test_scale_invariance(self, rng: np.random.Generator):
        """测试两侧同乘 2 的幂时比值逐位不变"""
        x = rng.uniform(size=30)
        y = rng.uniform(size=30)
        design = SpacingsService.design_from_sizes(30, 30, 1)
        base = SpacingsService.spacing_ratios(
            SpacingsService.disjoint_spacings(x, 1, design.N),
            SpacingsService.disjoint_spacings(y, 1, design.N),
            design,
        )
        scaled = SpacingsService.spacing_ratios(
            SpacingsService.raw_spacings(2.0 * x, 0.0, 2.0, 1, design.N),
            SpacingsService.raw_spacings(2.0 * y, 0.0, 2.0, 1, design.N),
            design,
        )
        np.testing.assert_array_equal(base.ratios, scaled.ratios)

    def test_open_unit_interval(self, rng: np.random.Generator):
        """测试所有比值位于 (0,1)"""
        ratios = SpacingsService.ratios_from_samples(rng.uniform(size=200), rng.uniform(size=300), m=3)
        assert ratios.size == ratios.design.N + 1
        assert np.all((ratios.ratios > 0.0) & (ratios.ratios < 1.0))


class TestEmpiricalCdf:
    """经验分布函数测试"""

    def test_bounds(self):
        """测试 x=1 与 x<0"""
        ratios = _ratios([0.25, 0.75])
        assert SpacingsService.empirical_cdf(ratios, 1.0) == 1.0
        assert SpacingsService.empirical_cdf(ratios, -0.1) == 0.0

    def test_count(self):
        """测试直接计数"""
        assert SpacingsService.empirical_cdf(_ratios([0.25, 0.75]), 0.5) == 0.5

    def test_right_continuous(self):
        """测试跳跃点处右连续"""
        ratios = _ratios([0.25, 0.75])
        assert SpacingsService.empirical_cdf(ratios, 0.25) == 0.5
        assert SpacingsService.empirical_cdf(ratios, np.nextafter(0.25, 0.0)) == 0.0


class TestEmpiricalProcess:
    """比值经验过程测试"""

    def test_endpoints(self):
        """测试 γ_N(0) = γ_N(1) = 0"""
        ratios = _ratios([0.1, 0.4, 0.8], m=2)
        assert SpacingsService.gamma_at(ratios, 0.0) == 0.0
        assert SpacingsService.gamma_at(ratios, 1.0) == 0.0

    def test_balanced_midpoint(self):
        """测试 m=1, 比值 {0.25, 0.75} 在 1/2 处为 0"""
        assert SpacingsService.gamma_at(_ratios([0.25, 0.75]), 0.5) == 0.0

    def test_below_all_ratios(self):
        """测试所有比值以下 γ_N = -√(N+1)·H_m(x)"""
        ratios = _ratios([0.4, 0.6, 0.7], m=2)
        x = 0.3
        expected = -math.sqrt(3.0) * DistributionService.beta_cdf(2, x)
        assert SpacingsService.gamma_at(ratios, x) == pytest.approx(expected, abs=1e-15)

    def test_grid_path(self):
        """测试网格路径在缺少端点时补全"""
        ratios = _ratios([0.25, 0.75])
        path = SpacingsService.empirical_process(ratios, [0.25, 0.5])
        np.testing.assert_array_equal(path.grid, [0.0, 0.25, 0.5, 1.0])
        assert path.values[0] == 0.0 and path.values[-1] == 0.0

    def test_invalid_grid(self):
        """测试非单调网格"""
        with pytest.raises(DomainException):
            SpacingsService.empirical_process(_ratios([0.25, 0.75]), [0.0, 0.6, 0.4, 1.0])

    def test_exact_sup_dominates_grid(self, rng: np.random.Generator):
        """测试精确上确界不小于任意网格上的最大值，且与密网格结果接近"""
        ratios = SpacingsService.ratios_from_samples(rng.uniform(size=120), rng.uniform(size=120), m=2)
        exact = SpacingsService.gamma_sup_abs(ratios)
        dense = SpacingsService.empirical_process(ratios, 200001).sup_abs()
        assert exact >= dense
        assert exact - dense < 1e-2

    def test_exact_integral(self, rng: np.random.Generator):
        """测试积分的闭式与密网格梯形积分一致"""
        ratios = SpacingsService.ratios_from_samples(rng.uniform(size=80), rng.uniform(size=80), m=1)
        dense = SpacingsService.empirical_process(ratios, 400001).integral()
        assert SpacingsService.gamma_integral(ratios) == pytest.approx(dense, abs=1e-4)


class TestIntervalMap:
    """区间重参数化测试"""

    def test_identity_for_equal_lengths(self):
        """测试 e = h 时为恒等映射"""
        ts = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(SpacingsService.interval_map(ts, 2.0, 2.0), ts, atol=1e-15)

    def test_inverse(self):
        """测试逆映射"""
        ts = np.linspace(0.01, 0.99, 25)
        mapped = SpacingsService.interval_map(ts, 1.5, 4.0)
        np.testing.assert_allclose(SpacingsService.interval_map_inverse(mapped, 1.5, 4.0), ts, atol=1e-14)

    def test_endpoints_fixed(self):
        """测试 0 与 1 是不动点"""
        assert SpacingsService.interval_map(0.0, 1.0, 3.0) == 0.0
        assert SpacingsService.interval_map(1.0, 1.0, 3.0) == 1.0

    def test_nonpositive_length(self):
        """测试非正区间长度"""
        with pytest.raises(DomainException):
            SpacingsService.interval_map(0.5, 0.0, 1.0)

"""
Monte Carlo 验证服务测试

测试指数分块表示、事件恒等式、泛函抽样、KS 距离、协方差估计、积分 oracle 和实验报告
"""

import json
import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from app.core.exceptions import DomainException
from app.schemas.design import CenteredKernel, SampleDesign
from app.schemas.experiment import (
    BridgeComposedSource,
    EvalAt,
    ExperimentConfig,
    GammaNSource,
    Integral,
    LimitSource,
    SupAbs,
    VarianceCheck,
    ZeroSource,
)
from app.schemas.samples import GridPath
from app.services.distkit import DistributionService
from app.services.file_io import FileIOService
from app.services.gausslim import LimitProcessService
from app.services.verify import VerificationService

pytestmark = pytest.mark.unit


class TestRepresentation:
    """指数分块表示测试"""

    def test_shapes(self):
        """测试分块和的长度"""
        draw = VerificationService.representation_draw(2, N=9, P=3, Q=5, seed=1)
        assert draw.z.size == 13
        assert draw.zprime.size == 15
        assert draw.ratios.size == 10
        assert np.all(draw.z > 0.0) and np.all(draw.zprime > 0.0)

    def test_paired_symmetry(self):
        """测试 ξ ≡ ζ 且 P = Q 时 Δ_N = 0、Q_N = 0"""
        draw = VerificationService.representation_draw(3, N=20, P=4, Q=4, seed=2, paired=True)
        assert draw.delta_n == 0.0
        assert draw.q_n == 0.0
        np.testing.assert_array_equal(draw.ratios, 0.5)

    def test_paired_requires_equal_surplus(self):
        """测试 paired 抽样要求 P = Q"""
        with pytest.raises(DomainException):
            VerificationService.representation_draw(1, N=5, P=1, Q=2, seed=1, paired=True)

    def test_statistics_consistent(self):
        """测试 Δ、Θ、D_N 与分块和的关系"""
        m, N, P, Q = 2, 15, 4, 9
        draw = VerificationService.representation_draw(m, N, P, Q, seed=3)
        head_x, head_y = draw.z[: N + 1], draw.zprime[: N + 1]
        assert draw.delta_n == pytest.approx(float(np.mean(head_x - head_y)), abs=1e-12)
        assert draw.theta_n == pytest.approx(float(np.mean(head_x + head_y)) - 2 * m, abs=1e-12)
        a = (N + 1) / (N + P + 1)
        b = (N + 1) / (N + Q + 1)
        expected = draw.q_n + (a + b) * draw.delta_n / (2 * m) + (a - b) * draw.theta_n / (2 * m)
        assert draw.d_n == pytest.approx(expected, abs=1e-15)
        np.testing.assert_allclose(draw.v, DistributionService.beta_cdf(m, draw.ratios))

    def test_seed_reproducible(self):
        """测试相同种子得到相同抽样"""
        first = VerificationService.representation_draw(2, 30, 2, 2, seed=9)
        second = VerificationService.representation_draw(2, 30, 2, 2, seed=9)
        np.testing.assert_array_equal(first.z, second.z)
        assert first.d_n == second.d_n

    def test_negative_counts(self):
        """测试负的计数"""
        with pytest.raises(DomainException):
            VerificationService.representation_draw(1, N=-1, P=0, Q=0, seed=1)


class TestEventIdentity:
    """事件恒等式测试"""

    def test_no_disagreement(self):
        """测试三组事件逐点一致"""
        ts = VerificationService.identity_points(50)
        for seed in range(20):
            draw = VerificationService.representation_draw(2, N=40, P=7, Q=13, seed=seed)
            result = VerificationService.check_event_identity(draw, ts)
            assert result.comparisons == 2 * 41 * 50
            assert result.disagreements == 0

    def test_balanced_design(self):
        """测试 P = Q = 0"""
        draw = VerificationService.representation_draw(1, N=100, P=0, Q=0, seed=4)
        ts = VerificationService.identity_points(25)
        assert VerificationService.check_event_identity(draw, ts).disagreements == 0

    def test_points_in_open_interval(self):
        """测试检查点必须位于 (0,1)"""
        draw = VerificationService.representation_draw(1, N=3, P=0, Q=0, seed=1)
        with pytest.raises(DomainException):
            VerificationService.check_event_identity(draw, [0.0, 0.5])

    def test_identity_points(self):
        """测试等距检查点"""
        np.testing.assert_allclose(VerificationService.identity_points(3), [0.25, 0.5, 0.75])


class TestKsStatistic:
    """KS 距离测试"""

    def test_identical(self):
        """测试相同样本距离为 0"""
        sample = np.array([0.3, 0.1, 0.7])
        assert VerificationService.ks_statistic(sample, sample) == 0.0

    def test_separated(self):
        """测试完全分离的样本距离为 1"""
        assert VerificationService.ks_statistic([1.0, 2.0], [3.0, 4.0]) == 1.0

    def test_interleaved(self):
        """测试 {1,2} 与 {1.5,2.5}"""
        assert VerificationService.ks_statistic([1.0, 2.0], [1.5, 2.5]) == pytest.approx(0.5)

    def test_empty(self):
        """测试空样本"""
        with pytest.raises(DomainException):
            VerificationService.ks_statistic([], [1.0])


class TestMonteCarloFunctional:
    """泛函抽样测试"""

    def test_zero_source(self, master_seed: int):
        """测试零路径的 sup 为 0"""
        sample = VerificationService.mc_functional(ZeroSource(), SupAbs(), 17, None, master_seed)
        np.testing.assert_array_equal(sample, np.zeros(17))

    def test_reps_must_be_positive(self, master_seed: int):
        """测试 reps = 0"""
        with pytest.raises(DomainException):
            VerificationService.mc_functional(ZeroSource(), SupAbs(), 0, None, master_seed)

    def test_gamma_source_independent_of_threads(self, small_design: SampleDesign, master_seed: int):
        """测试 γ_N 样本与线程数无关"""
        source = GammaNSource(design=small_design)
        one = VerificationService.mc_functional(source, SupAbs(), 300, None, master_seed, threads=1)
        three = VerificationService.mc_functional(source, SupAbs(), 300, None, master_seed, threads=3)
        np.testing.assert_array_equal(one, three)

    def test_limit_source_independent_of_threads(self, master_seed: int):
        """测试极限样本与线程数无关"""
        source = LimitSource(m=2, C=1.4)
        one = VerificationService.mc_functional(source, Integral(), 700, 129, master_seed, threads=1)
        four = VerificationService.mc_functional(source, Integral(), 700, 129, master_seed, threads=4)
        np.testing.assert_array_equal(one, four)

    def test_prefix_stable(self, master_seed: int):
        """测试第 i 个值只依赖 (master_seed, i)"""
        source = LimitSource(m=1, C=0.5)
        short = VerificationService.mc_functional(source, EvalAt(t=0.3), 40, 65, master_seed)
        long = VerificationService.mc_functional(source, EvalAt(t=0.3), 300, 65, master_seed)
        np.testing.assert_array_equal(short, long[:40])

    def test_bridge_composed_equals_zero_centering(self, master_seed: int):
        """测试 B∘H_m 来源与 C = 0 的极限来源一致"""
        a = VerificationService.mc_functional(BridgeComposedSource(m=3), SupAbs(), 50, 257, master_seed)
        b = VerificationService.mc_functional(LimitSource(m=3, C=0.0), SupAbs(), 50, 257, master_seed)
        np.testing.assert_array_equal(a, b)

    def test_gamma_functionals_match_ratios(self, small_design: SampleDesign, master_seed: int):
        """测试 γ_N 的泛函与直接构造的比值一致"""
        sample = VerificationService.mc_functional(GammaNSource(design=small_design), Integral(), 5, None, master_seed)
        ratios = VerificationService.uniform_ratios(small_design, master_seed, 3)
        expected = math.sqrt(ratios.size) * (0.5 - float(np.mean(ratios.ratios)))
        assert sample[3] == pytest.approx(expected, abs=1e-15)

    @pytest.mark.slow
    def test_bridge_variance_at_midpoint(self, master_seed: int):
        """测试 m=1, C=0 时 t=1/2 处方差为 0.25"""
        reps = 40000
        sample = VerificationService.mc_functional(LimitSource(m=1, C=0.0), EvalAt(t=0.5), reps, 257, master_seed)
        assert float(np.var(sample, ddof=1)) == pytest.approx(0.25, abs=4 * 0.25 * math.sqrt(2.0 / reps))


class TestCovariance:
    """样本协方差测试"""

    def test_zero_paths(self):
        """测试零路径的协方差为零矩阵"""
        grid = np.linspace(0.0, 1.0, 9)
        paths = [GridPath(grid=grid, values=np.zeros(9)) for _ in range(4)]
        estimate = VerificationService.empirical_covariance(paths, [2, 4, 6])
        np.testing.assert_array_equal(estimate.matrix, np.zeros((3, 3)))
        assert estimate.max_abs_error is None

    def test_symmetric(self):
        """测试协方差矩阵对称"""
        paths = [LimitProcessService.simulate_limit_path(2, 1.0, 65, seed=s) for s in range(30)]
        estimate = VerificationService.empirical_covariance(paths, [8, 16, 32, 48], kernel=CenteredKernel(m=2, C=1.0))
        np.testing.assert_array_equal(estimate.matrix, estimate.matrix.T)
        assert estimate.max_abs_error is not None
        assert estimate.points == [0.125, 0.25, 0.5, 0.75]

    def test_mismatched_grids(self):
        """测试网格不一致"""
        a = GridPath(grid=np.linspace(0.0, 1.0, 5), values=np.zeros(5))
        b = GridPath(grid=[0.0, 0.2, 0.5, 0.75, 1.0], values=np.zeros(5))
        with pytest.raises(DomainException):
            VerificationService.empirical_covariance([a, b], [1])

    def test_needs_two_paths(self):
        """测试路径数少于 2"""
        grid = np.linspace(0.0, 1.0, 5)
        with pytest.raises(DomainException):
            VerificationService.empirical_covariance([GridPath(grid=grid, values=np.zeros(5))], [1])

    def test_matrix_input_requires_grid(self):
        """测试矩阵输入必须给出网格"""
        with pytest.raises(DomainException):
            VerificationService.empirical_covariance(np.zeros((3, 5)), [1])

    @pytest.mark.slow
    def test_limit_kernel(self, master_seed: int):
        """测试 m=1, C=1 时 9 个探针点上的协方差接近 K_1"""
        grid = np.linspace(0.0, 1.0, 257)
        matrix = LimitProcessService.simulate_limit_paths(1, 1.0, grid, 20000, master_seed)
        indices = [32 * k for k in range(9)]
        kernel = CenteredKernel(m=1, C=1.0)
        estimate = VerificationService.empirical_covariance(matrix, indices, kernel=kernel, grid=grid)
        assert estimate.max_abs_error is not None
        assert estimate.max_abs_error <= 0.01


class TestQuadratureOracles:
    """积分 oracle 测试"""

    def test_psi_oracle(self):
        """测试 Ψ 的积分形式"""
        assert VerificationService.quadrature_oracles(1, 0.0).psi_quad == pytest.approx(0.0, abs=1e-12)
        assert VerificationService.quadrature_oracles(1, 0.5).psi_quad == pytest.approx(0.125, abs=1e-8)

    def test_sigma2_oracle(self):
        """测试 σ² 的二重积分"""
        assert VerificationService.quadrature_oracles(1).sigma2_quad == pytest.approx(1.0 / 12.0, abs=1e-6)
        assert VerificationService.quadrature_oracles(1).psi_quad is None

    def test_agrees_with_closed_forms(self):
        """测试与闭式 Ψ、σ² 一致"""
        for m in (2, 3):
            for t in (0.2, 0.5, 0.9):
                oracle = VerificationService.quadrature_oracles(m, t)
                assert oracle.psi_quad == pytest.approx(LimitProcessService.psi(m, t), abs=1e-8)
            assert oracle.sigma2_quad == pytest.approx(LimitProcessService.sigma2_bh(m), abs=1e-6)

    def test_t_out_of_range(self):
        """测试 t 越界"""
        with pytest.raises(DomainException):
            VerificationService.quadrature_oracles(1, 1.2)


class TestVarianceCheck:
    """方差判据测试"""

    def test_relative(self):
        """测试相对误差"""
        check = VarianceCheck.compare("theta", 2.1, 2.0, 0.1)
        assert check.mode == "relative"
        assert check.error == pytest.approx(0.05)
        assert check.passed

    def test_absolute_when_target_zero(self):
        """测试目标为 0 时比较绝对值"""
        check = VarianceCheck.compare("d", 0.2, 0.0, 0.1)
        assert check.mode == "absolute"
        assert not check.passed

    def test_dominance(self):
        """测试相对参考方差的比值"""
        assert VarianceCheck.dominated("d", 0.01, 1.0, 0.05).passed
        assert not VarianceCheck.dominated("d", 0.1, 1.0, 0.05).passed


class TestExperiment:
    """verify 实验测试"""

    def test_zero_reps_rejected(self):
        """测试 reps = 0"""
        with pytest.raises(ValidationError):
            ExperimentConfig(m=1, N=10, reps=0, seed=1)

    def test_missing_design(self):
        """测试缺少设计参数"""
        with pytest.raises(ValidationError):
            ExperimentConfig(m=1, reps=10, seed=1)

    def test_eval_at_needs_t(self):
        """测试 eval_at 泛函必须给出 t"""
        with pytest.raises(ValidationError):
            ExperimentConfig(m=1, N=10, reps=10, seed=1, functional="eval_at")

    def test_balanced_regime_report(self, master_seed: int):
        """测试 c = d = 0, m = 1 时 C = 1 + 1/√3 及报告结构"""
        config = ExperimentConfig(m=1, N=30, c=0.0, d=0.0, reps=40, grid=129, seed=master_seed, functional="integral")
        report = VerificationService.run_experiment(config)
        assert report.design.P == 0 and report.design.Q == 0
        assert report.r_nm == pytest.approx(1.0 / 3.0)
        assert report.R_infinity == pytest.approx(1.0 / 3.0)
        assert report.C == pytest.approx(1.0 + 1.0 / math.sqrt(3.0))
        assert report.grid == 129
        assert report.gamma_summary.size == 40
        assert report.event_identity.comparisons == 2 * 40 * config.identity_points * 31
        assert report.event_identity.disagreements == 0
        assert {check.name for check in report.variance_checks} == {"delta", "theta", "q", "d", "integral"}

    def test_flags_are_pure(self, master_seed: int):
        """测试判据只由记录的数值和阈值决定"""
        config = ExperimentConfig(m=2, N=20, P=5, Q=5, reps=30, grid=65, seed=master_seed)
        report = VerificationService.run_experiment(config)
        assert report.passed_flags["ks"] == (report.ks <= config.ks_tolerance)
        for check in report.variance_checks:
            assert report.passed_flags[f"variance_{check.name}"] == (check.error <= check.tolerance)
        assert report.passed == all(report.passed_flags.values())

    def test_minus_sign(self, master_seed: int):
        """测试 C = 1 - √R"""
        config = ExperimentConfig(m=1, N=30, reps=10, grid=65, seed=master_seed, sign="minus")
        report = VerificationService.run_experiment(config)
        assert report.C == pytest.approx(1.0 - 1.0 / math.sqrt(3.0))

    def test_report_reproducible(self, master_seed: int):
        """测试报告与线程数无关，且序列化不含耗时"""
        config = ExperimentConfig(m=1, N=25, P=3, Q=8, reps=300, grid=65, seed=master_seed)
        one = VerificationService.run_experiment(config, threads=1)
        three = VerificationService.run_experiment(config, threads=3)
        assert one.model_dump_json() == three.model_dump_json()
        assert "wall_clock" not in one.model_dump()

    def test_report_json_keys(self, master_seed: int):
        """测试报告 JSON 使用 pass 与 event_identity_checked 键"""
        config = ExperimentConfig(m=1, N=10, P=2, Q=5, reps=20, grid=33, seed=master_seed)
        report = VerificationService.run_experiment(config)
        payload = json.loads(FileIOService.to_json_text(report))
        assert payload["pass"] is report.passed
        assert payload["event_identity_checked"] == report.event_identity.model_dump()
        assert "passed" not in payload
        assert "event_identity" not in payload
        assert list(payload)[-3:] == ["passed_flags", "pass", "master_seed"]


@pytest.mark.slow
class TestRepresentationLaws:
    """分块表示统计量的分布性质（Monte Carlo）"""

    def test_marginal_ratio_law(self):
        """测试单次抽样 N=10^4 的比值服从 Beta(m,m)"""
        for m in (1, 2, 3):
            draw = VerificationService.representation_draw(m, N=10000, P=0, Q=0, seed=100 + m)
            distance = stats.kstest(draw.ratios, lambda x, m=m: DistributionService.beta_cdf(m, x)).statistic
            assert distance <= 1.63 / math.sqrt(10001)

    def test_uniform_transform(self):
        """测试 V_k 的 KS 距离中位数低于 5% 临界值"""
        N = 200
        distances = [
            stats.kstest(VerificationService.representation_draw(2, N, 3, 3, seed=s).v, "uniform").statistic
            for s in range(100)
        ]
        assert float(np.median(distances)) <= 1.36 / math.sqrt(N + 1)

    def test_theta_law(self):
        """测试 √(N+1)Θ_N 均值为 0、方差为 2m"""
        reps, N, m = 10000, 50, 2
        thetas = [VerificationService.representation_draw(m, N, 0, 0, seed=s).theta_n for s in range(reps)]
        values = math.sqrt(N + 1) * np.array(thetas)
        assert abs(float(np.mean(values))) <= 4 * math.sqrt(2 * m / reps)
        assert float(np.var(values, ddof=1)) == pytest.approx(2 * m, rel=0.1)

    def test_lemma_variances_balanced(self, master_seed: int):
        """测试 P = Q = 0 时 Θ、Q_N 的方差以及 D_N 的退化"""
        for m in (1, 2):
            result = VerificationService.lemma_variances(m, N=2000, P=0, Q=0, reps=2000, seed=master_seed, threads=2)
            assert result.theta == pytest.approx(2 * m, rel=0.1)
            assert result.q == pytest.approx(2.0 / m, rel=0.1)
            assert result.target_d == 0.0
            assert result.d <= 0.05 * result.q

    @pytest.mark.parametrize("m", [1, 3])
    def test_experiment_unbounded_regime(self, m: int, master_seed: int):
        """测试 P、Q 远大于 N 时 γ_N 与 B∘H_m 的积分泛函一致，积分方差接近 R·σ²"""
        config = ExperimentConfig(
            m=m, N=200, P=20000, Q=20000, reps=2000, grid=257, seed=master_seed, functional="integral"
        )
        report = VerificationService.run_experiment(config, threads=2)
        assert report.C == pytest.approx(1.0 + math.sqrt(report.r_nm))
        integral = next(check for check in report.variance_checks if check.name == "integral")
        assert integral.target == pytest.approx(report.r_nm / (4 * (2 * m + 1)))
        assert integral.passed, integral
        assert report.passed_flags["ks"], report.ks
        assert report.passed_flags["event_identity"]

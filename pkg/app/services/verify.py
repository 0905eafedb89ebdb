"""
Monte Carlo 验证服务

指数分块表示的抽样、路径泛函的分布估计、数值积分 oracle 以及 γ_N 与极限族的比较实验
"""

import math
import time
from collections.abc import Sequence

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, stats

from app.core.config import settings
from app.core.exceptions import DomainException
from app.schemas.design import CenteredKernel, SampleDesign
from app.schemas.experiment import (
    BridgeComposedSource,
    EvalAt,
    EventIdentityResult,
    ExperimentConfig,
    GammaNSource,
    Integral,
    LemmaVariances,
    LimitSource,
    MCReport,
    PathFunctional,
    PathSource,
    SampleSummary,
    SupAbs,
    VarianceCheck,
    ZeroSource,
    functional_from_name,
)
from app.schemas.samples import GridPath, RatioSample, RepresentationDraw
from app.services.distkit import DistributionService
from app.services.gausslim import LimitProcessService
from app.services.spacings import SpacingsService
from app.utils.grid import GridSpec, resolve_grid
from app.utils.replicates import run_replicates
from app.utils.rng import (
    STREAM_REPRESENTATION,
    STREAM_SAMPLE_X,
    STREAM_SAMPLE_Y,
    make_rng,
    replicate_rng,
)


class CovarianceEstimate(BaseModel):
    """探针点上的样本协方差"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    points: list[float] = Field(..., description="探针点")
    matrix: np.ndarray = Field(..., description="无偏样本协方差矩阵")
    max_abs_error: float | None = Field(default=None, description="与目标核的最大绝对偏差")


class QuadratureOracles(BaseModel):
    """由积分形式独立计算的 Ψ(t) 与 σ²"""

    psi_quad: float | None = Field(default=None, description="Ψ(t) 的数值积分")
    sigma2_quad: float = Field(..., description="σ² 的数值二重积分")


class VerificationService:
    """γ_N 与极限族比较的 Monte Carlo 验证服务"""

    # ==================== 指数分块表示 ====================

    @classmethod
    def _unit_exponentials(cls, rng: np.random.Generator, size: int) -> NDArray[np.float64]:
        """-log(U)，U 取 (0,1] 上的均匀数"""
        return -np.log(1.0 - rng.random(size))

    @classmethod
    def representation_draw(
        cls,
        m: int,
        N: int,
        P: int,
        Q: int,
        seed: int | np.random.Generator,
        paired: bool = False,
    ) -> RepresentationDraw:
        """
        指数分块表示的一次抽样

        Z_k 为 m 个单位指数之和（k = 0..N+P），Z'_k 同理（k = 0..N+Q）

        Args:
            paired: 令 ξ 与 ζ 相同（要求 P = Q），用于对称性检查
        """
        m = DistributionService.check_order(m)
        if N < 0 or P < 0 or Q < 0:
            raise DomainException(msg="N/P/Q 必须非负", detail={"N": N, "P": P, "Q": Q})
        if paired and P != Q:
            raise DomainException(msg="paired 抽样要求 P = Q", detail={"P": P, "Q": Q})

        rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
        zeta = cls._unit_exponentials(rng, m * (N + P + 1))
        xi = zeta if paired else cls._unit_exponentials(rng, m * (N + Q + 1))
        z = zeta.reshape(N + P + 1, m).sum(axis=1)
        zprime = xi.reshape(N + Q + 1, m).sum(axis=1)

        head_x, head_y = z[: N + 1], zprime[: N + 1]
        t_x, r_x = float(head_x.sum()), float(z[N + 1 :].sum())
        t_y, r_y = float(head_y.sum()), float(zprime[N + 1 :].sum())

        delta = float(np.mean(head_x - head_y))
        theta = float(np.mean(head_x + head_y)) - 2 * m
        q_n = ((t_y + r_y) / (N + Q + 1)) / ((t_x + r_x) / (N + P + 1)) - 1.0
        a = (N + 1) / (N + P + 1)
        b = (N + 1) / (N + Q + 1)
        d_n = q_n + (a + b) * delta / (2 * m) + (a - b) * theta / (2 * m)

        ratios = head_x / (head_x + head_y)
        spacings_x = head_x / (t_x + r_x)
        spacings_y = head_y / (t_y + r_y)
        weighted_x = (N + P + 1) * spacings_x
        weighted_y = (N + Q + 1) * spacings_y

        return RepresentationDraw(
            m=m,
            N=N,
            P=P,
            Q=Q,
            z=z,
            zprime=zprime,
            t_x=t_x,
            r_x=r_x,
            t_y=t_y,
            r_y=r_y,
            delta_n=delta,
            theta_n=theta,
            q_n=q_n,
            d_n=d_n,
            ratios=ratios,
            v=np.asarray(DistributionService.beta_cdf(m, ratios)),
            spacings_x=spacings_x,
            spacings_y=spacings_y,
            observed_ratios=weighted_x / (weighted_x + weighted_y),
        )

    @classmethod
    def check_event_identity(cls, draw: RepresentationDraw, ts: ArrayLike) -> EventIdentityResult:
        """
        逐点比较三组事件，要求布尔值完全一致

        {观测比值 ≤ t} = {R_{k,N} ≤ τ_N(t)} = {V_k ≤ H_m(τ_N(t))}
        """
        points = np.asarray(ts, dtype=np.float64).reshape(-1)
        if np.any(points <= 0.0) or np.any(points >= 1.0):
            raise DomainException(msg="t 必须位于开区间 (0, 1)")
        tau = draw.tau_n(points)
        direct = draw.observed_ratios[:, None] <= points[None, :]
        via_tau = draw.ratios[:, None] <= tau[None, :]
        via_uniform = draw.v[:, None] <= np.asarray(DistributionService.beta_cdf(draw.m, tau))[None, :]
        disagreements = int(np.count_nonzero(direct != via_tau) + np.count_nonzero(direct != via_uniform))
        return EventIdentityResult(comparisons=2 * direct.size, disagreements=disagreements)

    @classmethod
    def identity_points(cls, count: int) -> NDArray[np.float64]:
        """(0,1) 内的 count 个等距检查点"""
        return np.arange(1, count + 1) / (count + 1)

    @classmethod
    def lemma_variances(
        cls,
        m: int,
        N: int,
        P: int,
        Q: int,
        reps: int,
        seed: int,
        threads: int | None = None,
    ) -> LemmaVariances:
        """
        √(N+1)·(Δ_N, Θ_N, Q_N, D_N) 的样本方差

        目标：Δ 与 Θ 为 2m；Q_N 为 σ2²(c, d)；D_N 为 σ1²(c, d)，其中 c = P/(N+1)，d = Q/(N+1)
        """
        if reps < 2:
            raise DomainException(msg="方差估计至少需要 2 次重复", detail={"reps": reps})
        scale = math.sqrt(N + 1)

        def worker(start: int, stop: int) -> NDArray[np.float64]:
            rows = []
            for index in range(start, stop):
                draw = cls.representation_draw(m, N, P, Q, replicate_rng(seed, index, STREAM_REPRESENTATION))
                rows.append((draw.delta_n, draw.theta_n, draw.q_n, draw.d_n))
            return scale * np.asarray(rows)

        values = run_replicates(worker, reps, threads=threads)
        var = np.var(values, axis=0, ddof=1)
        sigma1, sigma2 = LimitProcessService.asymptotic_variances(m, P / (N + 1), Q / (N + 1))
        return LemmaVariances(
            reps=reps,
            delta=float(var[0]),
            theta=float(var[1]),
            q=float(var[2]),
            d=float(var[3]),
            target_delta=2.0 * m,
            target_theta=2.0 * m,
            target_q=sigma2,
            target_d=sigma1,
        )

    # ==================== 路径泛函 ====================

    @classmethod
    def _evaluate_rows(
        cls, functional: PathFunctional, rows: NDArray[np.float64], grid: NDArray[np.float64]
    ) -> NDArray[np.float64]:
        match functional:
            case SupAbs():
                return np.max(np.abs(rows), axis=-1)
            case Integral():
                return np.trapezoid(rows, grid, axis=-1)
            case EvalAt(t=t):
                return np.array([np.interp(t, grid, row) for row in rows])
        raise DomainException(msg=f"未知泛函: {functional}")

    @classmethod
    def _evaluate_ratios(cls, functional: PathFunctional, ratios: RatioSample) -> float:
        match functional:
            case SupAbs():
                return SpacingsService.gamma_sup_abs(ratios)
            case Integral():
                return SpacingsService.gamma_integral(ratios)
            case EvalAt(t=t):
                return float(SpacingsService.gamma_at(ratios, t))
        raise DomainException(msg=f"未知泛函: {functional}")

    @classmethod
    def uniform_ratios(
        cls,
        design: SampleDesign,
        master_seed: int,
        index: int,
        stream: int | None = None,
    ) -> RatioSample:
        """
        第 index 次重复：抽取两组均匀样本并构造比值

        Args:
            stream: 单一随机流编号，两组样本依次从该流抽取；None 时 X、Y 各用自己的流
        """
        if stream is None:
            x = replicate_rng(master_seed, index, STREAM_SAMPLE_X).random(design.n1)
            y = replicate_rng(master_seed, index, STREAM_SAMPLE_Y).random(design.n2)
        else:
            rng = replicate_rng(master_seed, index, stream)
            x = rng.random(design.n1)
            y = rng.random(design.n2)
        sx = SpacingsService.disjoint_spacings(SpacingsService.ordered_sample(x), design.m, design.N)
        sy = SpacingsService.disjoint_spacings(SpacingsService.ordered_sample(y), design.m, design.N)
        return SpacingsService.spacing_ratios(sx, sy, design)

    @classmethod
    def default_grid(cls, functional: PathFunctional) -> int:
        """sup 泛函用 SUP_GRID，其余用 MC_GRID"""
        return settings.SUP_GRID if isinstance(functional, SupAbs) else settings.MC_GRID

    @classmethod
    def mc_functional(
        cls,
        source: PathSource,
        functional: PathFunctional,
        reps: int,
        grid: GridSpec,
        master_seed: int,
        threads: int | None = None,
    ) -> NDArray[np.float64]:
        """
        泛函的 Monte Carlo 样本

        γ_N 来源的泛函精确计算（不依赖网格）；极限来源在网格上计算

        Returns:
            长度为 reps 的样本，第 i 个值只依赖 (master_seed, i)
        """
        if reps < 1:
            raise DomainException(msg="重复次数必须至少为 1", detail={"reps": reps})

        match source:
            case ZeroSource():
                return np.zeros(reps)
            case GammaNSource(design=design, stream=stream):

                def gamma_worker(start: int, stop: int) -> NDArray[np.float64]:
                    return np.array(
                        [
                            cls._evaluate_ratios(functional, cls.uniform_ratios(design, master_seed, i, stream))
                            for i in range(start, stop)
                        ]
                    )

                return run_replicates(gamma_worker, reps, threads=threads)
            case LimitSource() | BridgeComposedSource():
                m = source.m
                C = source.C if isinstance(source, LimitSource) else 0.0
                points = resolve_grid(grid, cls.default_grid(functional))

                def limit_worker(start: int, stop: int) -> NDArray[np.float64]:
                    rows = LimitProcessService.limit_rows(m, C, points, master_seed, start, stop)
                    return cls._evaluate_rows(functional, rows, points)

                return run_replicates(limit_worker, reps, threads=threads)
        raise DomainException(msg=f"未知样本来源: {source}")

    @classmethod
    def ks_statistic(cls, a: ArrayLike, b: ArrayLike) -> float:
        """两样本 Kolmogorov-Smirnov 距离"""
        left = np.asarray(a, dtype=np.float64).reshape(-1)
        right = np.asarray(b, dtype=np.float64).reshape(-1)
        if left.size == 0 or right.size == 0:
            raise DomainException(msg="KS 距离需要两个非空样本")
        return float(stats.ks_2samp(left, right).statistic)

    @classmethod
    def empirical_covariance(
        cls,
        paths: Sequence[GridPath] | NDArray[np.float64],
        point_indices: Sequence[int],
        kernel: CenteredKernel | None = None,
        grid: ArrayLike | None = None,
    ) -> CovarianceEstimate:
        """
        探针点上的样本协方差，以及与 K_C 的最大绝对偏差

        Args:
            paths: GridPath 列表，或形状 (k, len(grid)) 的矩阵（此时必须给出 grid）
            point_indices: 探针点在网格中的下标
            kernel: 目标协方差核
        """
        if isinstance(paths, np.ndarray):
            if grid is None:
                raise DomainException(msg="矩阵形式的路径必须给出网格")
            points = np.asarray(grid, dtype=np.float64)
            matrix = paths
            if matrix.ndim != 2 or matrix.shape[1] != points.size:
                raise DomainException(msg="路径矩阵与网格长度不一致")
        else:
            if not paths:
                raise DomainException(msg="至少需要 2 条路径")
            points = paths[0].grid
            for path in paths[1:]:
                if path.grid.shape != points.shape or not np.array_equal(path.grid, points):
                    raise DomainException(msg="所有路径必须共享同一网格")
            matrix = np.stack([path.values for path in paths])

        if matrix.shape[0] < 2:
            raise DomainException(msg="至少需要 2 条路径", detail={"paths": int(matrix.shape[0])})
        idx = np.asarray(point_indices, dtype=np.intp)
        cov = np.atleast_2d(np.cov(matrix[:, idx], rowvar=False, ddof=1))
        cov = 0.5 * (cov + cov.T)

        error = None
        if kernel is not None:
            chosen = points[idx]
            target = np.asarray(LimitProcessService.kernel_kc(kernel.m, kernel.C, chosen[:, None], chosen[None, :]))
            error = float(np.max(np.abs(cov - target)))
        return CovarianceEstimate(points=points[idx].tolist(), matrix=cov, max_abs_error=error)

    # ==================== 积分 oracle ====================

    @classmethod
    def quadrature_oracles(cls, m: int, t: float | None = None) -> QuadratureOracles:
        """
        Ψ(t) = ∫_0^1 {H(s∧t) - H(s)H(t)} ds

        σ² = ∫∫ {H(s∧t) - H(s)H(t)} ds dt = 2∫_0^1 (1 - H(t)) ∫_0^t H(s) ds dt
        """
        m = DistributionService.check_order(m)

        def cdf(x: float) -> float:
            return float(DistributionService.beta_cdf(m, min(max(x, 0.0), 1.0)))

        psi_value = None
        if t is not None:
            if not 0.0 <= t <= 1.0:
                raise DomainException(msg="t 必须位于 [0, 1]", detail={"t": t})
            ht = cdf(t)
            below, _ = integrate.quad(lambda s: cdf(s) * (1.0 - ht), 0.0, t, epsabs=1e-13, epsrel=1e-12)
            above, _ = integrate.quad(lambda s: ht * (1.0 - cdf(s)), t, 1.0, epsabs=1e-13, epsrel=1e-12)
            psi_value = below + above

        def inner(x: float) -> float:
            value, _ = integrate.quad(cdf, 0.0, x, epsabs=1e-13, epsrel=1e-12)
            return 2.0 * (1.0 - cdf(x)) * value

        sigma2, _ = integrate.quad(inner, 0.0, 1.0, epsabs=1e-12, epsrel=1e-10)
        return QuadratureOracles(psi_quad=psi_value, sigma2_quad=sigma2)

    # ==================== 实验 ====================

    @classmethod
    def _regime_of(cls, config: ExperimentConfig) -> float | None:
        if config.c is None or config.d is None:
            return None
        return LimitProcessService.regime(config.m, config.c, config.d).R_infinity

    @classmethod
    def run_experiment(cls, config: ExperimentConfig, threads: int | None = None) -> MCReport:
        """
        比较 γ_N 的泛函分布与极限族 (B∘H_m)_C 的泛函分布

        C = 1 ± √R_{N,m}；同时检查分块表示统计量的方差和事件恒等式
        """
        start_time = time.perf_counter()
        design = SpacingsService.resolve_design(
            config.m, config.n1, config.n2, config.N, config.P, config.Q, config.c, config.d
        )
        functional = functional_from_name(config.functional, config.t)
        r_design = SpacingsService.r_nm(design)
        root = math.sqrt(max(r_design, 0.0))
        C = 1.0 + root if config.sign == "plus" else 1.0 - root
        points = resolve_grid(config.grid, cls.default_grid(functional))

        logger.info(
            f"run_experiment: m={design.m}, N={design.N}, P={design.P}, Q={design.Q}, "
            f"functional={functional.kind}, reps={config.reps}, C={C:.6f}"
        )

        reps, seed = config.reps, config.seed
        gamma_sample = cls.mc_functional(GammaNSource(design=design), functional, reps, points, seed, threads)
        limit_sample = cls.mc_functional(LimitSource(m=design.m, C=C), functional, reps, points, seed, threads)
        ks = cls.ks_statistic(gamma_sample, limit_sample)

        checks = cls._variance_checks(config, design, gamma_sample, r_design, threads)
        identity = cls._event_identity(config, design)

        flags = {"ks": ks <= config.ks_tolerance, "event_identity": identity.disagreements == 0}
        for check in checks:
            flags[f"variance_{check.name}"] = check.passed

        wall_clock = time.perf_counter() - start_time
        report = MCReport(
            config=config,
            design=design,
            r_nm=r_design,
            R_infinity=cls._regime_of(config),
            C=C,
            grid=int(points.size),
            gamma_summary=SampleSummary.from_sample(gamma_sample),
            limit_summary=SampleSummary.from_sample(limit_sample),
            ks=ks,
            variance_checks=checks,
            event_identity=identity,
            passed_flags=flags,
            passed=all(flags.values()),
            master_seed=config.seed,
            wall_clock=wall_clock,
            gamma_sample=gamma_sample,
            limit_sample=limit_sample,
        )
        status = "✅ passed" if report.passed else "⚠️ failed"
        logger.info(f"run_experiment: {status}, ks={ks:.4f}, time={wall_clock:.2f}s")
        return report

    @classmethod
    def _variance_checks(
        cls,
        config: ExperimentConfig,
        design: SampleDesign,
        gamma_sample: NDArray[np.float64],
        r_design: float,
        threads: int | None,
    ) -> list[VarianceCheck]:
        tol = config.variance_tolerance
        checks: list[VarianceCheck] = []
        if config.reps >= 2:
            lemma = cls.lemma_variances(design.m, design.N, design.P, design.Q, config.reps, config.seed, threads)
            checks.append(VarianceCheck.compare("delta", lemma.delta, lemma.target_delta, tol))
            checks.append(VarianceCheck.compare("theta", lemma.theta, lemma.target_theta, tol))
            checks.append(VarianceCheck.compare("q", lemma.q, lemma.target_q, tol))
            if lemma.target_d > 0.0:
                checks.append(VarianceCheck.compare("d", lemma.d, lemma.target_d, tol))
            else:
                checks.append(VarianceCheck.dominated("d", lemma.d, lemma.q, config.dominance_ratio))

            if config.functional == "integral":
                integral_var = float(np.var(gamma_sample, ddof=1))
                target = r_design * LimitProcessService.sigma2_bh(design.m)
                checks.append(VarianceCheck.compare("integral", integral_var, target, tol))
        return checks

    @classmethod
    def _event_identity(cls, config: ExperimentConfig, design: SampleDesign) -> EventIdentityResult:
        ts = cls.identity_points(config.identity_points)
        comparisons = 0
        disagreements = 0
        for index in range(min(config.reps, config.identity_reps)):
            rng = replicate_rng(config.seed, index, STREAM_REPRESENTATION)
            draw = cls.representation_draw(design.m, design.N, design.P, design.Q, rng)
            result = cls.check_event_identity(draw, ts)
            comparisons += result.comparisons
            disagreements += result.disagreements
        return EventIdentityResult(comparisons=comparisons, disagreements=disagreements)

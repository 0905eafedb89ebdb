"""
Gauss 极限过程服务

Brown 桥、B∘H_m 及其均值中心化族 (B∘H_m)_C 的模拟；Ψ、σ²、协方差核 K_C、J_C 算子和区域常数
"""

import math

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from app.core.exceptions import DomainException
from app.schemas.design import ExtendedNonNeg, RegimeParams, inverse_one_plus, is_unbounded, odds_term
from app.schemas.samples import GridPath
from app.services.distkit import DistributionService
from app.utils.grid import GridSpec, resolve_grid
from app.utils.replicates import run_replicates
from app.utils.rng import STREAM_LIMIT, make_rng, replicate_rng


class LimitProcessService:
    """极限过程 (B∘H_m)_C 服务"""

    # ==================== 闭式常数 ====================

    @classmethod
    def psi_constant(cls, m: int) -> float:
        """a_m = (2m-1)! / (2m((m-1)!)^2)"""
        return DistributionService.beta_mm_constant(m) / (2 * m)

    @classmethod
    def psi(cls, m: int, t: ArrayLike) -> float | NDArray[np.float64]:
        """Ψ(t) = a_m (t(1-t))^m"""
        m = DistributionService.check_order(m)
        ts = np.asarray(t, dtype=np.float64)
        if np.any(ts < 0.0) or np.any(ts > 1.0):
            raise DomainException(msg="t 必须位于 [0, 1]")
        out = cls.psi_constant(m) * (ts * (1.0 - ts)) ** m
        return float(out) if ts.ndim == 0 else out

    @classmethod
    def sigma2_bh(cls, m: int) -> float:
        """Var ∫_0^1 B(H_m(s)) ds = 1/(4(2m+1))"""
        m = DistributionService.check_order(m)
        return 1.0 / (4 * (2 * m + 1))

    @classmethod
    def centering_product(cls, C: float) -> float:
        """C^2 - 2C，写成 (C-1)^2 - 1 使 C 与 2-C 对称"""
        return (C - 1.0) ** 2 - 1.0

    @classmethod
    def kernel_kc(cls, m: int, C: float, s: ArrayLike, t: ArrayLike) -> float | NDArray[np.float64]:
        """
        (B∘H_m)_C 的协方差核

        K_C(s,t) = H(s)∧H(t) - H(s)H(t) + 4(2m+1)(C^2-2C)·a_m^2·(st(1-s)(1-t))^m
        """
        m = DistributionService.check_order(m)
        ss = np.asarray(s, dtype=np.float64)
        ts = np.asarray(t, dtype=np.float64)
        hs = np.asarray(DistributionService.beta_cdf(m, ss))
        ht = np.asarray(DistributionService.beta_cdf(m, ts))
        bridge = np.minimum(hs, ht) - hs * ht
        weight = 4 * (2 * m + 1) * cls.centering_product(C) * cls.psi_constant(m) ** 2
        out = bridge + weight * (ss * ts * (1.0 - ss) * (1.0 - ts)) ** m
        return float(out) if out.ndim == 0 else out

    @classmethod
    def centering_coefficient(cls, m: int, C: float, t: ArrayLike) -> float | NDArray[np.float64]:
        """中心化系数的展开形式 2(2m+1)C·(2m-1)!/(m((m-1)!)^2)·(t(1-t))^m"""
        m = DistributionService.check_order(m)
        ts = np.asarray(t, dtype=np.float64)
        out = 2 * (2 * m + 1) * C * DistributionService.beta_mm_constant(m) / m * (ts * (1.0 - ts)) ** m
        return float(out) if ts.ndim == 0 else out

    # ==================== 区域常数 ====================

    @classmethod
    def _check_extended(cls, value: ExtendedNonNeg, name: str) -> None:
        if not is_unbounded(value) and (math.isnan(float(value)) or float(value) < 0.0):
            raise DomainException(msg=f"{name} 必须非负或为 ∞", detail={name: value})

    @classmethod
    def regime(cls, m: int, c: ExtendedNonNeg, d: ExtendedNonNeg) -> RegimeParams:
        """R = 1 - m/(2m+1)·[1/(1+c) + 1/(1+d)]，C_± = 1 ± √R"""
        m = DistributionService.check_order(m)
        cls._check_extended(c, "c")
        cls._check_extended(d, "d")
        r_inf = 1.0 - m / (2 * m + 1) * (inverse_one_plus(c) + inverse_one_plus(d))
        root = math.sqrt(r_inf)
        return RegimeParams(m=m, c=c, d=d, R_infinity=r_inf, C_plus=1.0 + root, C_minus=1.0 - root)

    @classmethod
    def asymptotic_variances(cls, m: int, c: ExtendedNonNeg, d: ExtendedNonNeg) -> tuple[float, float]:
        """
        极限方差 (σ1², σ2²)

        σ1² = (1/m)[c/(1+c)^2 + d/(1+d)^2]，σ2² = (1/m)[1/(1+c) + 1/(1+d)]，∞ 对应的项为 0
        """
        m = DistributionService.check_order(m)
        cls._check_extended(c, "c")
        cls._check_extended(d, "d")
        sigma1 = (odds_term(c) + odds_term(d)) / m
        sigma2 = (inverse_one_plus(c) + inverse_one_plus(d)) / m
        return sigma1, sigma2

    # ==================== 路径模拟 ====================

    @classmethod
    def bridge_rows(cls, times: NDArray[np.float64], normals: NDArray[np.float64]) -> NDArray[np.float64]:
        """
        由标准正态增量构造 Brown 桥 B(u) = W(u) - u W(1)

        Args:
            times: 非降时间点，首尾为 0 与 1
            normals: 形状 (..., len(times)-1) 的标准正态数
        """
        scale = np.sqrt(np.diff(times))
        increments = normals * scale
        walk = np.concatenate((np.zeros(increments.shape[:-1] + (1,)), np.cumsum(increments, axis=-1)), axis=-1)
        return walk - times * walk[..., -1:]

    @classmethod
    def simulate_bridge(cls, grid: GridSpec, seed: int) -> GridPath:
        """网格上的一条 Brown 桥，端点恰为 0"""
        points = resolve_grid(grid)
        rng = make_rng(seed)
        values = cls.bridge_rows(points, rng.standard_normal(points.size - 1))
        return GridPath(grid=points, values=values)

    @classmethod
    def apply_jc_values(
        cls, values: NDArray[np.float64], grid: NDArray[np.float64], C: float, m: int
    ) -> NDArray[np.float64]:
        """
        J_C x = x - C·Ψ/σ²_h·∫x，沿最后一维作用

        σ²_h 取 Ψ 在同一网格上的梯形积分，使 ∫ Ψ/σ²_h = 1 在离散意义下成立
        """
        if grid.size < 3:
            raise DomainException(msg="网格过粗，至少需要 3 个点", detail={"points": int(grid.size)})
        if C == 0.0:
            return values
        weight = np.asarray(cls.psi(m, grid))
        weight = weight / np.trapezoid(weight, grid)
        integral = np.trapezoid(values, grid, axis=-1)
        return values - C * np.multiply.outer(integral, weight)

    @classmethod
    def apply_jc(cls, path: GridPath, C: float, m: int) -> GridPath:
        """对路径施加均值中心化算子 J_C；J_0 为恒等"""
        DistributionService.check_order(m)
        return GridPath(grid=path.grid, values=cls.apply_jc_values(path.values, path.grid, C, m))

    @classmethod
    def limit_rows(
        cls,
        m: int,
        C: float,
        grid: NDArray[np.float64],
        master_seed: int,
        start: int,
        stop: int,
    ) -> NDArray[np.float64]:
        """第 start..stop-1 次重复的极限路径，每行使用独立派生的生成器"""
        times = np.asarray(DistributionService.beta_cdf(m, grid))
        normals = np.stack(
            [
                replicate_rng(master_seed, index, STREAM_LIMIT).standard_normal(grid.size - 1)
                for index in range(start, stop)
            ]
        )
        return cls.apply_jc_values(cls.bridge_rows(times, normals), grid, C, m)

    @classmethod
    def simulate_limit_path(cls, m: int, C: float, grid: GridSpec, seed: int) -> GridPath:
        """
        一条 (B∘H_m)_C 路径

        在 H_m(grid) 上模拟 Brown 桥，再施加 J_C
        """
        m = DistributionService.check_order(m)
        points = resolve_grid(grid)
        times = np.asarray(DistributionService.beta_cdf(m, points))
        values = cls.bridge_rows(times, make_rng(seed).standard_normal(points.size - 1))
        return GridPath(grid=points, values=cls.apply_jc_values(values, points, C, m))

    @classmethod
    def simulate_limit_paths(
        cls,
        m: int,
        C: float,
        grid: GridSpec,
        reps: int,
        master_seed: int,
        threads: int | None = None,
    ) -> NDArray[np.float64]:
        """
        批量模拟极限路径，返回形状 (reps, len(grid)) 的矩阵

        第 i 行只依赖 (master_seed, i)，与线程数无关
        """
        m = DistributionService.check_order(m)
        points = resolve_grid(grid)
        logger.debug(f"simulate_limit_paths: m={m}, C={C}, grid={points.size}, reps={reps}")
        return run_replicates(
            lambda start, stop: cls.limit_rows(m, C, points, master_seed, start, stop),
            reps,
            threads=threads,
        )

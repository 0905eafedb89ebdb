"""
分布函数服务

Beta(m,m) 与 Gamma(2m,1) 的精确分布函数、密度、数值反演分位数、分位数密度和尾部主项

所有方法同时接受标量和 numpy 数组；标量输入返回 float
"""

import math
from functools import lru_cache
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, computed_field
from scipy import special

from app.core.config import settings
from app.core.exceptions import DomainException, NumericException

Distribution = Literal["beta_mm", "gamma_2m"]
TailTerm = Literal["q3_at0", "q3_at1", "q2_at0", "q2_at1", "Q3_at0", "Q3_at1", "Q2_at0", "Q2_at1"]

FloatOrArray = float | NDArray[np.float64]


def _as_array(x: ArrayLike) -> tuple[NDArray[np.float64], bool]:
    arr = np.asarray(x, dtype=np.float64)
    return arr, arr.ndim == 0


def _wrap(values: NDArray[np.float64], scalar: bool) -> FloatOrArray:
    return float(values) if scalar else values


def _summary(arr: NDArray[np.float64]) -> float | list[float]:
    if arr.ndim == 0:
        return float(arr)
    return [float(np.nanmin(arr)), float(np.nanmax(arr))] if arr.size else []


class DistributionService:
    """Beta(m,m) / Gamma(2m,1) 分布函数服务"""

    # m 不超过该值时使用精确整数运算，否则在对数空间计算
    EXACT_ORDER_LIMIT = 10

    # ==================== 参数检查 ====================

    @classmethod
    def check_order(cls, m: int) -> int:
        """检查阶数 m 为 1..MAX_ORDER 的整数"""
        if isinstance(m, bool) or not float(m).is_integer():
            raise DomainException(msg="阶数 m 必须为整数", detail={"m": m})
        order = int(m)
        if order < 1 or order > settings.MAX_ORDER:
            raise DomainException(msg=f"阶数 m 必须在 1..{settings.MAX_ORDER} 之间", detail={"m": m})
        return order

    @classmethod
    def _check_closed_unit(cls, arr: NDArray[np.float64], name: str) -> None:
        if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainException(msg=f"{name} 必须位于 [0, 1]", detail={name: _summary(arr)})

    @classmethod
    def _check_open_unit(cls, arr: NDArray[np.float64], name: str) -> None:
        if np.any(np.isnan(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise DomainException(msg=f"{name} 必须位于开区间 (0, 1)", detail={name: _summary(arr)})

    @classmethod
    def _check_nonneg(cls, arr: NDArray[np.float64]) -> None:
        if np.any(np.isnan(arr)) or np.any(arr < 0.0):
            raise DomainException(msg="x 必须非负", detail={"x": _summary(arr)})

    # ==================== 常数表 ====================

    @staticmethod
    @lru_cache(maxsize=None)
    def log_factorial_table(m: int) -> NDArray[np.float64]:
        """log(j!)，j = 0..2m"""
        table = special.gammaln(np.arange(2 * m + 1, dtype=np.float64) + 1.0)
        table.setflags(write=False)
        return table

    @staticmethod
    @lru_cache(maxsize=None)
    def binomial_row(m: int) -> NDArray[np.float64]:
        """C(2m-1, j)，j = 0..2m-1"""
        n = 2 * m - 1
        if m <= DistributionService.EXACT_ORDER_LIMIT:
            row = np.array([math.comb(n, j) for j in range(n + 1)], dtype=np.float64)
        else:
            lf = DistributionService.log_factorial_table(m)
            j = np.arange(n + 1)
            # 系数均为小于 2^53 的整数，取整后与精确值一致
            row = np.rint(np.exp(lf[n] - lf[j] - lf[n - j]))
        row.setflags(write=False)
        return row

    @staticmethod
    @lru_cache(maxsize=None)
    def beta_mm_constant(m: int) -> float:
        """1/β(m,m) = (2m-1)! / ((m-1)!)^2"""
        m = DistributionService.check_order(m)
        if m <= DistributionService.EXACT_ORDER_LIMIT:
            return float(math.factorial(2 * m - 1) // math.factorial(m - 1) ** 2)
        lf = DistributionService.log_factorial_table(m)
        return float(np.exp(lf[2 * m - 1] - 2.0 * lf[m - 1]))

    @classmethod
    def pochhammer_half(cls, m: int) -> float:
        """Pochhammer 符号 (1/2)_m"""
        m = cls.check_order(m)
        if m <= cls.EXACT_ORDER_LIMIT:
            return math.prod(0.5 + i for i in range(m))
        return float(np.exp(special.gammaln(m + 0.5) - special.gammaln(0.5)))

    @classmethod
    def beta_mm_constant_pochhammer(cls, m: int) -> float:
        """1/β(m,m) 的 Pochhammer 形式 m (1/2)_m / (2^{1-2m} m!)"""
        m = cls.check_order(m)
        return m * cls.pochhammer_half(m) / (2.0 ** (1 - 2 * m) * math.factorial(m))

    @classmethod
    def beta_tail_constant(cls, m: int) -> float:
        """{(1/2)_m / (2^{1-2m} m!)}^{-1/m}"""
        m = cls.check_order(m)
        return (cls.pochhammer_half(m) / (2.0 ** (1 - 2 * m) * math.factorial(m))) ** (-1.0 / m)

    @classmethod
    def gamma_tail_constant(cls, m: int) -> float:
        """Γ(2m+1)^{1/(2m)}"""
        m = cls.check_order(m)
        return float(np.exp(special.gammaln(2 * m + 1) / (2 * m)))

    # ==================== Beta(m,m) ====================

    @classmethod
    def _beta_lower_sum(cls, m: int, x: NDArray[np.float64]) -> NDArray[np.float64]:
        """Σ_{j=m}^{2m-1} C(2m-1,j) x^j (1-x)^{2m-1-j}，全部为正项"""
        n = 2 * m - 1
        j = np.arange(m, n + 1)
        coef = cls.binomial_row(m)[m:]
        xs = x[..., None]
        return np.sum(coef * xs**j * (1.0 - xs) ** (n - j), axis=-1)

    @classmethod
    def beta_cdf(cls, m: int, x: ArrayLike) -> FloatOrArray:
        """
        Beta(m,m) 分布函数 H_m(x)，有限二项和形式

        x > 1/2 时通过对称性 H_m(x) = 1 - H_m(1-x) 计算，端点值精确
        """
        m = cls.check_order(m)
        arr, scalar = _as_array(x)
        cls._check_closed_unit(arr, "x")
        lower = np.minimum(arr, 1.0 - arr)
        tail = cls._beta_lower_sum(m, lower)
        out = np.where(arr <= 0.5, tail, 1.0 - tail)
        return _wrap(out, scalar)

    @classmethod
    def beta_pdf(cls, m: int, x: ArrayLike) -> FloatOrArray:
        """Beta(m,m) 密度 x^{m-1}(1-x)^{m-1}/β(m,m)"""
        m = cls.check_order(m)
        arr, scalar = _as_array(x)
        cls._check_closed_unit(arr, "x")
        out = cls.beta_mm_constant(m) * arr ** (m - 1) * (1.0 - arr) ** (m - 1)
        return _wrap(np.asarray(out, dtype=np.float64), scalar)

    @classmethod
    def beta_quantile(cls, m: int, v: ArrayLike) -> FloatOrArray:
        """
        Beta(m,m) 分位数 Q_3(v)

        在 [0, 1/2] 上对 min(v, 1-v) 求解，再按对称性映射
        """
        m = cls.check_order(m)
        arr, scalar = _as_array(v)
        cls._check_open_unit(arr, "v")
        target = np.minimum(arr, 1.0 - arr)
        flat = target.reshape(-1)

        lo = np.zeros_like(flat)
        hi = np.full_like(flat, 0.5)
        x0 = cls.beta_tail_constant(m) * flat ** (1.0 / m)

        root = cls._bracketed_newton(
            lambda x: cls._beta_lower_sum(m, x),
            lambda x: cls.beta_mm_constant(m) * (x * (1.0 - x)) ** (m - 1),
            flat,
            lo,
            hi,
            x0,
        ).reshape(target.shape)
        root = np.where(target == 0.5, 0.5, root)
        out = np.where(arr <= 0.5, root, 1.0 - root)
        return _wrap(out, scalar)

    # ==================== Gamma(2m,1) ====================

    @classmethod
    def _gamma_upper_tail(cls, m: int, x: NDArray[np.float64]) -> NDArray[np.float64]:
        """e^{-x} Σ_{j=0}^{2m-1} x^j/j!，x > 0，对数空间逐项计算"""
        j = np.arange(2 * m)
        lf = cls.log_factorial_table(m)[: 2 * m]
        xs = x[..., None]
        return np.sum(np.exp(-xs + j * np.log(xs) - lf), axis=-1)

    @classmethod
    def gamma2m_sf(cls, m: int, x: ArrayLike) -> FloatOrArray:
        """Gamma(2m,1) 生存函数 e^{-x} Σ_{j<2m} x^j/j!"""
        m = cls.check_order(m)
        arr, scalar = _as_array(x)
        cls._check_nonneg(arr)
        positive = arr > 0.0
        safe = np.where(positive, arr, 1.0)
        out = np.where(positive, cls._gamma_upper_tail(m, safe), 1.0)
        return _wrap(out, scalar)

    @classmethod
    def gamma2m_cdf(cls, m: int, x: ArrayLike) -> FloatOrArray:
        """
        Gamma(2m,1) 分布函数 1 - e^{-x} Σ_{j<2m} x^j/j!

        x < 2m 时改用正则化下不完全 Gamma 函数，避免 1 - (接近 1 的数) 的相消
        """
        m = cls.check_order(m)
        arr, scalar = _as_array(x)
        cls._check_nonneg(arr)
        positive = arr > 0.0
        safe = np.where(positive, arr, 1.0)
        lower = special.gammainc(2 * m, safe)
        closed = 1.0 - cls._gamma_upper_tail(m, safe)
        out = np.where(positive, np.where(safe < 2 * m, lower, closed), 0.0)
        return _wrap(out, scalar)

    @classmethod
    def gamma2m_pdf(cls, m: int, x: ArrayLike) -> FloatOrArray:
        """Gamma(2m,1) 密度 x^{2m-1} e^{-x} / (2m-1)!"""
        m = cls.check_order(m)
        arr, scalar = _as_array(x)
        cls._check_nonneg(arr)
        positive = arr > 0.0
        safe = np.where(positive, arr, 1.0)
        lf = cls.log_factorial_table(m)
        dens = np.exp((2 * m - 1) * np.log(safe) - safe - lf[2 * m - 1])
        out = np.where(positive, dens, 0.0)
        return _wrap(out, scalar)

    @classmethod
    def gamma_upper_second_order(cls, m: int, w: ArrayLike) -> FloatOrArray:
        """上尾二阶近似 L + (2m-1) log L - log Γ(2m)，L = -log(1-w)"""
        m = cls.check_order(m)
        arr, scalar = _as_array(w)
        cls._check_open_unit(arr, "w")
        big_l = -np.log1p(-arr)
        out = big_l + (2 * m - 1) * np.log(big_l) - special.gammaln(2 * m)
        return _wrap(out, scalar)

    @classmethod
    def gamma2m_quantile(cls, m: int, w: ArrayLike) -> FloatOrArray:
        """
        Gamma(2m,1) 分位数 Q_2(w)

        w ≤ 1/2 时对分布函数求根，否则对生存函数求根（1-w 对 w ≥ 1/2 精确）；
        初值取尾部渐近式，上界按倍增扩展直到包含根
        """
        m = cls.check_order(m)
        arr, scalar = _as_array(w)
        cls._check_open_unit(arr, "w")
        flat = arr.reshape(-1)
        upper = flat > 0.5
        tail = 1.0 - flat

        lo = np.zeros_like(flat)
        hi = 2.0 * (-np.log(tail)) + 4.0 * m + 1.0
        for _ in range(64):
            short = np.asarray(cls.gamma2m_sf(m, hi)) > tail
            if not np.any(short):
                break
            hi = np.where(short, 2.0 * hi, hi)

        lower_guess = cls.gamma_tail_constant(m) * flat ** (1.0 / (2 * m))
        big_l = -np.log(tail)
        with np.errstate(divide="ignore", invalid="ignore"):
            upper_guess = big_l + (2 * m - 1) * np.log(big_l) - special.gammaln(2 * m)
        x0 = np.where(upper, upper_guess, lower_guess)

        # 上半部分求解 -sf(x) = -(1-w)，保持函数递增、导数仍为密度
        def distance(x: NDArray[np.float64]) -> NDArray[np.float64]:
            return np.where(upper, -np.asarray(cls.gamma2m_sf(m, x)), np.asarray(cls.gamma2m_cdf(m, x)))

        root = cls._bracketed_newton(
            distance,
            lambda x: np.asarray(cls.gamma2m_pdf(m, x)),
            np.where(upper, -tail, flat),
            lo,
            hi,
            x0,
        )
        return _wrap(root.reshape(arr.shape), scalar)

    # ==================== 分位数密度与尾部 ====================

    @classmethod
    def quantile_density(cls, dist: Distribution, m: int, u: ArrayLike) -> FloatOrArray:
        """分位数密度 q(u) = 1 / pdf(quantile(u))"""
        arr, scalar = _as_array(u)
        cls._check_open_unit(arr, "u")
        if dist == "beta_mm":
            dens = np.asarray(cls.beta_pdf(m, np.asarray(cls.beta_quantile(m, arr))))
        elif dist == "gamma_2m":
            dens = np.asarray(cls.gamma2m_pdf(m, np.asarray(cls.gamma2m_quantile(m, arr))))
        else:
            raise DomainException(msg=f"未知分布: {dist}")
        return _wrap(1.0 / dens, scalar)

    @classmethod
    def tail_leading_term(cls, which: TailTerm, m: int, u: ArrayLike) -> FloatOrArray:
        """分位数及分位数密度在 0、1 附近的主项"""
        m = cls.check_order(m)
        arr, scalar = _as_array(u)
        cls._check_open_unit(arr, "u")
        k3 = cls.beta_tail_constant(m)
        g2 = cls.gamma_tail_constant(m)

        match which:
            case "q3_at0":
                out = k3 / m * arr ** (1.0 / m - 1.0)
            case "q3_at1":
                out = k3 / m * (1.0 - arr) ** (1.0 / m - 1.0)
            case "q2_at0":
                out = g2 / (2 * m) * arr ** (1.0 / (2 * m) - 1.0)
            case "q2_at1":
                out = 1.0 / (1.0 - arr)
            case "Q3_at0":
                out = k3 * arr ** (1.0 / m)
            case "Q3_at1":
                out = 1.0 - k3 * (1.0 - arr) ** (1.0 / m)
            case "Q2_at0":
                out = g2 * arr ** (1.0 / (2 * m))
            case "Q2_at1":
                out = -np.log1p(-arr)
            case _:
                raise DomainException(msg=f"未知尾部项: {which}")
        return _wrap(np.asarray(out, dtype=np.float64), scalar)

    # ==================== 数值反演 ====================

    @classmethod
    def _bracketed_newton(
        cls,
        cdf,
        pdf,
        target: NDArray[np.float64],
        lo: NDArray[np.float64],
        hi: NDArray[np.float64],
        x0: NDArray[np.float64],
    ) -> NDArray[np.float64]:
        """
        带区间保护的 Newton 迭代，越界或导数退化时改用二分

        收敛判据为 |F(x) - 目标| ≤ QUANTILE_TOL·min(1, |目标|)，尾部概率很小时按相对误差收敛；
        收敛后再做一次 Newton 修正
        """
        tol = settings.QUANTILE_TOL * np.minimum(1.0, np.abs(target))
        lo = lo.copy()
        hi = hi.copy()
        x = np.where(np.isfinite(x0) & (x0 > lo) & (x0 < hi), x0, 0.5 * (lo + hi))
        eps = np.finfo(np.float64).eps

        for _ in range(settings.QUANTILE_MAX_ITER):
            f = cdf(x) - target
            collapsed = (hi - lo) <= 4.0 * eps * np.maximum(np.abs(x), np.finfo(np.float64).tiny)
            done = (np.abs(f) <= tol) | collapsed
            if np.all(done):
                return cls._polish(cdf, pdf, target, x, f, lo, hi)

            lo = np.where(f < 0.0, x, lo)
            hi = np.where(f > 0.0, x, hi)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = x - f / pdf(x)
            bisect = ~np.isfinite(step) | (step <= lo) | (step >= hi)
            x = np.where(done, x, np.where(bisect, 0.5 * (lo + hi), step))

        raise NumericException(
            msg="分位数反演未收敛",
            detail={"max_iter": settings.QUANTILE_MAX_ITER, "targets": _summary(target)},
        )

    @classmethod
    def _polish(cls, cdf, pdf, target, x, f, lo, hi) -> NDArray[np.float64]:
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - f / pdf(x)
        inside = np.isfinite(step) & (step >= lo) & (step <= hi)
        candidate = np.where(inside, step, x)
        better = np.abs(cdf(candidate) - target) <= np.abs(f)
        return np.where(better, candidate, x)


# ==================== 对象封装 ====================


class BetaSymmetric(BaseModel):
    """Beta(m,m) 分布"""

    model_config = ConfigDict(frozen=True)

    m: int = Field(..., ge=1, description="阶数")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def log_factorial_table(self) -> list[float]:
        return DistributionService.log_factorial_table(DistributionService.check_order(self.m)).tolist()

    def cdf(self, x: ArrayLike) -> FloatOrArray:
        return DistributionService.beta_cdf(self.m, x)

    def pdf(self, x: ArrayLike) -> FloatOrArray:
        return DistributionService.beta_pdf(self.m, x)

    def quantile(self, v: ArrayLike) -> FloatOrArray:
        return DistributionService.beta_quantile(self.m, v)

    def quantile_density(self, u: ArrayLike) -> FloatOrArray:
        return DistributionService.quantile_density("beta_mm", self.m, u)


class GammaTwoM(BaseModel):
    """Gamma(2m,1) 分布"""

    model_config = ConfigDict(frozen=True)

    m: int = Field(..., ge=1, description="阶数")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def shape(self) -> int:
        return 2 * self.m

    @computed_field  # type: ignore[prop-decorator]
    @property
    def rate(self) -> float:
        return 1.0

    def cdf(self, x: ArrayLike) -> FloatOrArray:
        return DistributionService.gamma2m_cdf(self.m, x)

    def sf(self, x: ArrayLike) -> FloatOrArray:
        return DistributionService.gamma2m_sf(self.m, x)

    def pdf(self, x: ArrayLike) -> FloatOrArray:
        return DistributionService.gamma2m_pdf(self.m, x)

    def quantile(self, w: ArrayLike) -> FloatOrArray:
        return DistributionService.gamma2m_quantile(self.m, w)

    def quantile_density(self, u: ArrayLike) -> FloatOrArray:
        return DistributionService.quantile_density("gamma_2m", self.m, u)

"""
样本设计与极限参数相关的 Pydantic Schema
"""

import math
from enum import StrEnum
from typing import Annotated, Any

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, computed_field, model_validator


class Unbounded(StrEnum):
    """扩展实数中的 +∞"""

    INF = "inf"


def _coerce_extended(value: Any) -> Any:
    """把 math.inf 和 "∞" 等写法统一为 Unbounded.INF"""
    if isinstance(value, float) and math.isinf(value) and value > 0:
        return Unbounded.INF
    if isinstance(value, str) and value.strip().lower() in {"inf", "infinity", "∞", "+inf"}:
        return Unbounded.INF
    return value


# 非负扩展实数：有限非负浮点数或 Unbounded.INF
ExtendedNonNeg = Annotated[
    Unbounded | Annotated[float, Field(ge=0, allow_inf_nan=False)],
    Field(union_mode="left_to_right"),
    BeforeValidator(_coerce_extended),
]


def is_unbounded(value: "float | Unbounded") -> bool:
    return value is Unbounded.INF or value == Unbounded.INF


def inverse_one_plus(value: "float | Unbounded") -> float:
    """1/(1+x)，约定 1/∞ = 0"""
    if is_unbounded(value):
        return 0.0
    return 1.0 / (1.0 + float(value))


def odds_term(value: "float | Unbounded") -> float:
    """x/(1+x)^2，约定 x = ∞ 时为 0"""
    if is_unbounded(value):
        return 0.0
    x = float(value)
    return x / (1.0 + x) ** 2


class SampleDesign(BaseModel):
    """两样本的不相交 m-间距设计"""

    model_config = ConfigDict(frozen=True)

    m: int = Field(..., ge=1, description="间距阶数")
    n1: int = Field(..., ge=1, description="X 样本量")
    n2: int = Field(..., ge=1, description="Y 样本量")
    N1: int = Field(..., ge=0, description="X 的最大不相交间距对数")
    N2: int = Field(..., ge=0, description="Y 的最大不相交间距对数")
    N: int = Field(..., ge=0, description="使用的间距对数（比值个数为 N+1）")
    P: int = Field(..., ge=0, description="X 的剩余间距数 N1 - N")
    Q: int = Field(..., ge=0, description="Y 的剩余间距数 N2 - N")

    @model_validator(mode="after")
    def validate_counts(self) -> "SampleDesign":
        """验证设计计数的一致性"""
        if self.N1 != (self.n1 + 1) // self.m - 1 or self.N2 != (self.n2 + 1) // self.m - 1:
            raise ValueError("N1/N2 与样本量和阶数不一致")
        if self.N > min(self.N1, self.N2):
            raise ValueError("N 不能超过 min(N1, N2)")
        if self.P != self.N1 - self.N or self.Q != self.N2 - self.N:
            raise ValueError("P/Q 必须等于 N1-N / N2-N")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def c_hat(self) -> float:
        """P/(N+1)"""
        return self.P / (self.N + 1)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def d_hat(self) -> float:
        """Q/(N+1)"""
        return self.Q / (self.N + 1)

    def swapped(self) -> "SampleDesign":
        """交换 X 与 Y 的角色"""
        return SampleDesign(m=self.m, n1=self.n2, n2=self.n1, N1=self.N2, N2=self.N1, N=self.N, P=self.Q, Q=self.P)


class RegimeParams(BaseModel):
    """渐近区域 (c, d) 决定的极限常数"""

    model_config = ConfigDict(frozen=True)

    m: int = Field(..., ge=1, description="间距阶数")
    c: ExtendedNonNeg = Field(..., description="lim P/(N+1)")
    d: ExtendedNonNeg = Field(..., description="lim Q/(N+1)")
    R_infinity: float = Field(..., description="极限区域常数")
    C_plus: float = Field(..., description="1 + sqrt(R)")
    C_minus: float = Field(..., description="1 - sqrt(R)")

    @model_validator(mode="after")
    def validate_range(self) -> "RegimeParams":
        lower = 1.0 / (2 * self.m + 1)
        if not (lower - 1e-12 <= self.R_infinity <= 1.0 + 1e-12):
            raise ValueError(f"R_infinity 必须位于 [{lower}, 1]")
        return self

    def centering_coefficients(self) -> tuple[float, float]:
        """整体中心化系数 4(2m+1)(2m-1)!/(2m((m-1)!)^2)·C_±"""
        m = self.m
        a_m = math.factorial(2 * m - 1) / (2 * m * math.factorial(m - 1) ** 2)
        base = 4 * (2 * m + 1) * a_m
        return base * self.C_plus, base * self.C_minus


class CenteredKernel(BaseModel):
    """均值中心化极限过程 (B∘H_m)_C 的协方差核参数"""

    model_config = ConfigDict(frozen=True)

    m: int = Field(..., ge=1, description="间距阶数")
    C: float = Field(..., allow_inf_nan=False, description="中心化常数")

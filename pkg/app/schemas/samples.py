"""
携带数组的领域类型

样本、间距、比值、网格路径和指数表示的一次抽样
"""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.schemas.design import SampleDesign


def _float_array(value: Any) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("必须是一维数组")
    if not np.all(np.isfinite(arr)):
        raise ValueError("数组中不能包含 NaN 或无穷")
    return arr


class ArrayModel(BaseModel):
    """数组字段的基类"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class OrderedSample(ArrayModel):
    """严格递增、位于 (0,1) 的次序统计量；哨兵 0 与 1 隐含在两端"""

    values: np.ndarray = Field(..., description="次序统计量")

    @field_validator("values", mode="before")
    @classmethod
    def to_array(cls, value: Any) -> np.ndarray:
        return _float_array(value)

    @field_validator("values")
    @classmethod
    def validate_order(cls, value: np.ndarray) -> np.ndarray:
        if value.size and (value[0] <= 0.0 or value[-1] >= 1.0):
            raise ValueError("次序统计量必须位于开区间 (0, 1)")
        if np.any(np.diff(value) <= 0.0):
            raise ValueError("次序统计量必须严格递增")
        return value

    @property
    def n(self) -> int:
        return int(self.values.size)

    def augmented(self) -> np.ndarray:
        """带哨兵的次序统计量 X_{0,n}=0, ..., X_{n+1,n}=1"""
        return np.concatenate(([0.0], self.values, [1.0]))


class DisjointSpacings(ArrayModel):
    """不相交 m-间距 S_k，k = 0..N"""

    values: np.ndarray = Field(..., description="间距")
    m: int = Field(..., ge=1, description="间距阶数")
    source_n: int = Field(..., ge=0, description="来源样本量")

    @field_validator("values", mode="before")
    @classmethod
    def to_array(cls, value: Any) -> np.ndarray:
        return _float_array(value)

    @field_validator("values")
    @classmethod
    def validate_positive(cls, value: np.ndarray) -> np.ndarray:
        if value.size == 0:
            raise ValueError("至少需要一个间距")
        if np.any(value <= 0.0):
            raise ValueError("间距必须为正")
        return value

    @property
    def count(self) -> int:
        return int(self.values.size)


class RatioSample(ArrayModel):
    """间距比值 R_k ∈ (0,1)，k = 0..N"""

    ratios: np.ndarray = Field(..., description="比值")
    design: SampleDesign = Field(..., description="样本设计")

    @field_validator("ratios", mode="before")
    @classmethod
    def to_array(cls, value: Any) -> np.ndarray:
        return _float_array(value)

    @model_validator(mode="after")
    def validate_ratios(self) -> "RatioSample":
        if self.ratios.size != self.design.N + 1:
            raise ValueError("比值个数必须等于 N+1")
        if np.any(self.ratios <= 0.0) or np.any(self.ratios >= 1.0):
            raise ValueError("比值必须位于开区间 (0, 1)")
        return self

    @property
    def m(self) -> int:
        return self.design.m

    @property
    def size(self) -> int:
        return int(self.ratios.size)


class GridPath(ArrayModel):
    """网格上的路径；网格严格递增且包含 0 与 1"""

    grid: np.ndarray = Field(..., description="网格")
    values: np.ndarray = Field(..., description="路径值")

    @field_validator("grid", "values", mode="before")
    @classmethod
    def to_array(cls, value: Any) -> np.ndarray:
        return _float_array(value)

    @model_validator(mode="after")
    def validate_grid(self) -> "GridPath":
        if self.grid.size < 2:
            raise ValueError("网格至少需要两个点")
        if self.grid.size != self.values.size:
            raise ValueError("网格与路径值长度不一致")
        if self.grid[0] != 0.0 or self.grid[-1] != 1.0:
            raise ValueError("网格必须以 0 开始、以 1 结束")
        if np.any(np.diff(self.grid) <= 0.0):
            raise ValueError("网格必须严格递增")
        return self

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self) -> float:
        """梯形积分"""
        return float(np.trapezoid(self.values, self.grid))


class RepresentationDraw(ArrayModel):
    """指数分块表示的一次抽样"""

    m: int = Field(..., ge=1, description="间距阶数")
    N: int = Field(..., ge=0)
    P: int = Field(..., ge=0)
    Q: int = Field(..., ge=0)
    z: np.ndarray = Field(..., description="X 侧 Gamma(m,1) 分块和，k = 0..N+P")
    zprime: np.ndarray = Field(..., description="Y 侧 Gamma(m,1) 分块和，k = 0..N+Q")
    t_x: float = Field(..., description="X 侧前 N+1 块之和")
    r_x: float = Field(..., description="X 侧剩余块之和")
    t_y: float = Field(..., description="Y 侧前 N+1 块之和")
    r_y: float = Field(..., description="Y 侧剩余块之和")
    delta_n: float = Field(..., description="差统计量")
    theta_n: float = Field(..., description="和统计量")
    q_n: float = Field(..., description="均值比偏差")
    d_n: float = Field(..., description="修正偏差")
    ratios: np.ndarray = Field(..., description="Z_k/(Z_k+Z'_k)，服从 Beta(m,m)")
    v: np.ndarray = Field(..., description="H_m(ratios)，服从均匀分布")
    spacings_x: np.ndarray = Field(..., description="X 侧间距 Z_k/(T_X+R_X)")
    spacings_y: np.ndarray = Field(..., description="Y 侧间距 Z'_k/(T_Y+R_Y)")
    observed_ratios: np.ndarray = Field(..., description="由间距构成的观测比值")

    @model_validator(mode="after")
    def validate_lengths(self) -> "RepresentationDraw":
        if self.z.size != self.N + self.P + 1 or self.zprime.size != self.N + self.Q + 1:
            raise ValueError("分块和的长度与设计不一致")
        if np.any(self.z <= 0.0) or np.any(self.zprime <= 0.0):
            raise ValueError("分块和必须为正")
        return self

    def tau_n(self, t: Any) -> np.ndarray:
        """随机时间变换 τ_N(t) = 1/(1 + (1/t - 1)(1 + Q_N))"""
        ts = np.asarray(t, dtype=np.float64)
        return 1.0 / (1.0 + (1.0 / ts - 1.0) * (1.0 + self.q_n))

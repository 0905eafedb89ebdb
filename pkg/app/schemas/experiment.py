"""
Monte Carlo 实验相关的 Pydantic Schema

样本来源、路径泛函、实验配置和实验报告
"""

from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.design import ExtendedNonNeg, SampleDesign

# ==================== 样本来源 ====================


class GammaNSource(BaseModel):
    """比值经验过程 γ_N：每次重复抽取新的均匀样本"""

    kind: Literal["gamma_n"] = "gamma_n"
    design: SampleDesign = Field(..., description="样本设计")
    stream: int | None = Field(default=None, ge=0, description="单一随机流编号；None 时 X、Y 各用自己的流")


class LimitSource(BaseModel):
    """极限过程 (B∘H_m)_C"""

    kind: Literal["limit"] = "limit"
    m: int = Field(..., ge=1, description="间距阶数")
    C: float = Field(..., allow_inf_nan=False, description="中心化常数")


class BridgeComposedSource(BaseModel):
    """B∘H_m，即 C = 0 的极限过程"""

    kind: Literal["bridge_composed"] = "bridge_composed"
    m: int = Field(..., ge=1, description="间距阶数")


class ZeroSource(BaseModel):
    """恒为零的路径（测试用）"""

    kind: Literal["zero"] = "zero"


PathSource = Annotated[
    GammaNSource | LimitSource | BridgeComposedSource | ZeroSource,
    Field(discriminator="kind"),
]


# ==================== 路径泛函 ====================


class SupAbs(BaseModel):
    """sup |x(t)|"""

    kind: Literal["sup_abs"] = "sup_abs"


class Integral(BaseModel):
    """∫_0^1 x(t) dt"""

    kind: Literal["integral"] = "integral"


class EvalAt(BaseModel):
    """x(t) 在固定点 t 的值"""

    kind: Literal["eval_at"] = "eval_at"
    t: float = Field(..., ge=0.0, le=1.0, description="取值点")


PathFunctional = Annotated[SupAbs | Integral | EvalAt, Field(discriminator="kind")]

FunctionalName = Literal["sup_abs", "integral", "eval_at"]


def functional_from_name(name: FunctionalName, t: float | None = None) -> SupAbs | Integral | EvalAt:
    """按名称构造泛函"""
    if name == "sup_abs":
        return SupAbs()
    if name == "integral":
        return Integral()
    return EvalAt(t=0.5 if t is None else t)


# ==================== 实验配置 ====================


class ExperimentConfig(BaseModel):
    """verify 实验的完整参数记录，原样回显到报告中"""

    model_config = ConfigDict(frozen=True)

    m: int = Field(..., ge=1, description="间距阶数")
    n1: int | None = Field(default=None, ge=1, description="X 样本量")
    n2: int | None = Field(default=None, ge=1, description="Y 样本量")
    N: int | None = Field(default=None, ge=0, description="间距对数")
    P: int | None = Field(default=None, ge=0, description="X 剩余间距数")
    Q: int | None = Field(default=None, ge=0, description="Y 剩余间距数")
    c: ExtendedNonNeg | None = Field(default=None, description="区域参数 c")
    d: ExtendedNonNeg | None = Field(default=None, description="区域参数 d")
    functional: FunctionalName = Field(default="sup_abs", description="路径泛函")
    t: float | None = Field(default=None, ge=0.0, le=1.0, description="eval_at 的取值点")
    sign: Literal["plus", "minus"] = Field(default="plus", description="C = 1 ± sqrt(R) 的符号")
    reps: int = Field(..., ge=1, description="每组重复次数")
    grid: int | None = Field(default=None, ge=3, description="极限路径网格点数")
    seed: int = Field(..., ge=0, description="主种子")
    ks_tolerance: float = Field(default=0.07, gt=0.0, le=1.0, description="KS 距离阈值")
    variance_tolerance: float = Field(default=0.10, gt=0.0, description="方差相对误差阈值")
    dominance_ratio: float = Field(default=0.05, gt=0.0, description="极限方差为 0 时相对 Var(Q_N) 的上界")
    identity_reps: int = Field(default=100, ge=1, description="事件恒等式检查的抽样次数")
    identity_points: int = Field(default=50, ge=1, description="每次抽样检查的 t 值个数")

    @model_validator(mode="after")
    def validate_design_inputs(self) -> "ExperimentConfig":
        """验证：必须给出 (n1, n2) 或 N 加上 (P, Q)/(c, d)"""
        if (self.n1 is None) != (self.n2 is None):
            raise ValueError("n1 与 n2 必须同时给出")
        if self.n1 is None and self.N is None:
            raise ValueError("必须给出 n1/n2 或 N")
        if (self.c is None) != (self.d is None):
            raise ValueError("c 与 d 必须同时给出")
        if self.functional == "eval_at" and self.t is None:
            raise ValueError("eval_at 泛函必须提供 t")
        return self


# ==================== 报告 ====================


class SampleSummary(BaseModel):
    """泛函样本的汇总"""

    size: int = Field(..., description="样本量")
    mean: float = Field(..., description="均值")
    variance: float = Field(..., description="无偏方差")
    quantiles: dict[str, float] = Field(..., description="分位数")

    @classmethod
    def from_sample(cls, sample: np.ndarray) -> "SampleSummary":
        levels = (0.5, 0.9, 0.95, 0.99)
        values = np.quantile(sample, levels)
        return cls(
            size=int(sample.size),
            mean=float(np.mean(sample)),
            variance=float(np.var(sample, ddof=1)) if sample.size > 1 else 0.0,
            quantiles={str(level): float(v) for level, v in zip(levels, values, strict=True)},
        )


class VarianceCheck(BaseModel):
    """方差估计与目标的比较"""

    name: str = Field(..., description="被检查的量")
    estimate: float = Field(..., description="样本方差")
    target: float = Field(..., description="目标方差")
    mode: Literal["relative", "absolute", "dominance"] = Field(..., description="比较方式")
    error: float = Field(..., description="相对误差、绝对误差或比值")
    tolerance: float = Field(..., description="阈值")
    passed: bool = Field(..., description="是否通过")

    @classmethod
    def compare(cls, name: str, estimate: float, target: float, tolerance: float) -> "VarianceCheck":
        """target > 0 时比较相对误差，否则比较绝对值"""
        if target > 0.0:
            error = abs(estimate - target) / target
            mode: Literal["relative", "absolute"] = "relative"
        else:
            error = abs(estimate)
            mode = "absolute"
        return cls(
            name=name,
            estimate=estimate,
            target=target,
            mode=mode,
            error=error,
            tolerance=tolerance,
            passed=error <= tolerance,
        )

    @classmethod
    def dominated(cls, name: str, estimate: float, reference: float, ratio: float) -> "VarianceCheck":
        """极限方差为 0：要求 estimate ≤ ratio·reference"""
        error = estimate / reference if reference > 0.0 else float(estimate > 0.0)
        return cls(
            name=name,
            estimate=estimate,
            target=0.0,
            mode="dominance",
            error=error,
            tolerance=ratio,
            passed=error <= ratio,
        )


class EventIdentityResult(BaseModel):
    """事件恒等式的逐点比较结果"""

    comparisons: int = Field(..., description="比较次数")
    disagreements: int = Field(..., description="不一致次数，必须为 0")


class LemmaVariances(BaseModel):
    """√(N+1)·(Δ_N, Θ_N, Q_N, D_N) 的样本方差及其目标"""

    reps: int
    delta: float
    theta: float
    q: float
    d: float
    target_delta: float
    target_theta: float
    target_q: float
    target_d: float


class MCReport(BaseModel):
    """verify 实验报告"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: ExperimentConfig = Field(..., description="实验配置回显")
    design: SampleDesign = Field(..., description="解析后的样本设计")
    r_nm: float = Field(..., description="有限样本区域常数")
    R_infinity: float | None = Field(default=None, description="给定区域参数时的极限常数")
    C: float = Field(..., description="极限过程使用的中心化常数")
    grid: int = Field(..., description="极限路径网格点数")
    gamma_summary: SampleSummary = Field(..., description="γ_N 泛函样本汇总")
    limit_summary: SampleSummary = Field(..., description="极限泛函样本汇总")
    ks: float = Field(..., description="两组样本的 KS 距离")
    variance_checks: list[VarianceCheck] = Field(default_factory=list)
    event_identity: EventIdentityResult = Field(
        ..., serialization_alias="event_identity_checked", description="事件恒等式检查"
    )
    passed_flags: dict[str, bool] = Field(..., description="各项判据")
    passed: bool = Field(..., serialization_alias="pass", description="是否全部通过")
    master_seed: int = Field(..., description="主种子")

    # 仅保存在内存中，不参与序列化
    wall_clock: float = Field(default=0.0, exclude=True)
    gamma_sample: np.ndarray | None = Field(default=None, exclude=True)
    limit_sample: np.ndarray | None = Field(default=None, exclude=True)

"""
两样本均匀性检验相关的 Pydantic Schema
"""

from typing import Literal

from pydantic import BaseModel, Field, model_validator

from app.schemas.design import SampleDesign


class Interval(BaseModel):
    """声明的样本区间 (lower, lower + length)"""

    lower: float = Field(..., allow_inf_nan=False, description="左端点")
    length: float = Field(..., gt=0.0, allow_inf_nan=False, description="区间长度")

    @property
    def upper(self) -> float:
        return self.lower + self.length


class TestResult(BaseModel):
    """检验结果"""

    __test__ = False  # 避免被 pytest 当作测试类收集

    statistic: float = Field(..., description="sup|γ_N|")
    critical_value: float = Field(..., description="临界值")
    p_value: float = Field(..., ge=0.0, le=1.0, description="Monte Carlo p 值")
    decision: Literal["reject", "accept"] = Field(..., description="检验结论")
    alpha: float = Field(..., gt=0.0, lt=1.0, description="显著性水平")
    mc_reps: int = Field(..., ge=1, description="零分布模拟次数")
    method: Literal["asymptotic", "finite_sample"] = Field(..., description="临界值来源")
    R: float = Field(..., description="有限样本区域常数")
    design: SampleDesign = Field(..., description="样本设计")
    interval_x: Interval = Field(..., description="X 的声明区间")
    interval_y: Interval = Field(..., description="Y 的声明区间")
    seed: int = Field(..., ge=0, description="主种子")

    @model_validator(mode="after")
    def validate_decision(self) -> "TestResult":
        """验证：reject 当且仅当统计量超过临界值"""
        if (self.decision == "reject") != (self.statistic > self.critical_value):
            raise ValueError("decision 与统计量、临界值不一致")
        return self


class CriticalValueEntry(BaseModel):
    """临界值缓存条目"""

    key: str = Field(..., description="参数键")
    critical_value: float = Field(..., description="临界值")
    draws: list[float] = Field(..., description="排序后的零分布样本")

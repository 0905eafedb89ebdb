"""
Pydantic Schema 模块

用于领域类型、实验配置和结果报告的数据验证和序列化
"""

from app.schemas.design import CenteredKernel, ExtendedNonNeg, RegimeParams, SampleDesign, Unbounded
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
    SampleSummary,
    SupAbs,
    VarianceCheck,
    ZeroSource,
)
from app.schemas.samples import DisjointSpacings, GridPath, OrderedSample, RatioSample, RepresentationDraw
from app.schemas.stest import CriticalValueEntry, Interval, TestResult

__all__ = [
    # Design
    "CenteredKernel",
    "ExtendedNonNeg",
    "RegimeParams",
    "SampleDesign",
    "Unbounded",
    # Experiment
    "BridgeComposedSource",
    "EvalAt",
    "EventIdentityResult",
    "ExperimentConfig",
    "GammaNSource",
    "Integral",
    "LemmaVariances",
    "LimitSource",
    "MCReport",
    "SampleSummary",
    "SupAbs",
    "VarianceCheck",
    "ZeroSource",
    # Samples
    "DisjointSpacings",
    "GridPath",
    "OrderedSample",
    "RatioSample",
    "RepresentationDraw",
    # Test
    "CriticalValueEntry",
    "Interval",
    "TestResult",
]

"""
Service 层

包含分布函数、间距、极限过程、Monte Carlo 验证和检验的计算逻辑
"""

from app.services.distkit import BetaSymmetric, DistributionService, GammaTwoM
from app.services.file_io import FileIOService
from app.services.gausslim import LimitProcessService
from app.services.spacings import SpacingsService
from app.services.stest import CriticalValueCache, UniformityTestService
from app.services.verify import VerificationService

__all__ = [
    "BetaSymmetric",
    "GammaTwoM",
    "DistributionService",
    "SpacingsService",
    "LimitProcessService",
    "VerificationService",
    "UniformityTestService",
    "FileIOService",
    "CriticalValueCache",
]

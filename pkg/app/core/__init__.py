"""
核心模块

包含配置管理和异常体系
"""

from app.core.config import settings
from app.core.exceptions import (
    AppException,
    ConfigException,
    DataException,
    DomainException,
    NumericException,
    VerificationFailed,
)

__all__ = [
    "settings",
    "AppException",
    "ConfigException",
    "DataException",
    "DomainException",
    "NumericException",
    "VerificationFailed",
]

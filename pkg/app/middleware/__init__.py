"""
中间件模块

包含命令日志包装和日志初始化
"""

from app.middleware.logging import log_command, setup_logging

__all__ = ["log_command", "setup_logging"]

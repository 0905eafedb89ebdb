"""
自定义异常和命令行异常处理器

统一处理计算中的各种异常，输出一致的错误格式并映射为进程退出码
"""

import json
import sys
from typing import Any

from loguru import logger
from pydantic import ValidationError

# 退出码约定
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class AppException(Exception):
    """应用自定义异常基类"""

    def __init__(
        self,
        code: int = EXIT_USAGE,
        msg: str = "请求错误",
        detail: Any = None,
    ):
        self.code = code
        self.msg = msg
        self.detail = detail
        super().__init__(msg)


class DomainException(AppException):
    """参数超出定义域或前置条件不满足"""

    def __init__(self, msg: str = "参数超出定义域", detail: Any = None):
        super().__init__(code=EXIT_USAGE, msg=msg, detail=detail)


class DataException(AppException):
    """数据异常（结值、样本越界等）"""

    def __init__(self, msg: str = "数据不合法", detail: Any = None):
        super().__init__(code=EXIT_USAGE, msg=msg, detail=detail)


class ConfigException(AppException):
    """配置或命令行参数错误"""

    def __init__(self, msg: str = "配置错误", detail: Any = None):
        super().__init__(code=EXIT_USAGE, msg=msg, detail=detail)


class NumericException(AppException):
    """数值求解未收敛"""

    def __init__(self, msg: str = "数值求解未收敛", detail: Any = None):
        super().__init__(code=EXIT_NUMERIC, msg=msg, detail=detail)


class VerificationFailed(AppException):
    """Monte Carlo 验证未通过"""

    def __init__(self, msg: str = "验证未通过", detail: Any = None):
        super().__init__(code=EXIT_FAILED, msg=msg, detail=detail)


def create_error_response(code: int, msg: str, detail: Any = None) -> str:
    """创建统一的错误输出"""
    return json.dumps(
        {
            "success": False,
            "code": code,
            "msg": msg,
            "err": detail,
        },
        ensure_ascii=False,
        default=str,
    )


def handle_cli_exception(exc: BaseException) -> int:
    """处理命令执行中的异常，返回退出码"""
    if isinstance(exc, AppException):
        logger.warning(f"AppException: {exc.msg} - Detail: {exc.detail}")
        print(create_error_response(exc.code, exc.msg, exc.detail), file=sys.stderr)
        return exc.code

    if isinstance(exc, ValidationError):
        errors = []
        for error in exc.errors():
            field = ".".join(str(loc) for loc in error["loc"])
            errors.append(
                {
                    "field": field,
                    "message": error["msg"],
                    "type": error["type"],
                }
            )
        logger.warning(f"ValidationError: {errors}")
        print(create_error_response(EXIT_USAGE, "参数验证失败", errors), file=sys.stderr)
        return EXIT_USAGE

    logger.exception(f"Unhandled exception: {exc}")
    print(create_error_response(EXIT_FAILED, "内部错误", str(exc)), file=sys.stderr)
    return EXIT_FAILED

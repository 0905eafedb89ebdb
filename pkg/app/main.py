"""
命令行主入口

构建解析器、注册子命令并统一处理异常和退出码
"""

import argparse
import sys
from collections.abc import Sequence

from app.api import dist, limit, simulate, test, verify
from app.core.config import settings
from app.core.exceptions import EXIT_USAGE, handle_cli_exception
from app.middleware.logging import log_command, setup_logging

# 子命令路由
ROUTERS = (dist, simulate, limit, verify, test)


def build_parser() -> argparse.ArgumentParser:
    """构建顶层解析器"""
    parser = argparse.ArgumentParser(
        prog="mspacings",
        description="m-间距比值经验过程：分布函数、极限过程模拟、Monte Carlo 验证与两样本均匀性检验",
    )
    parser.add_argument("--log-level", default=None, help="日志级别（默认读取 MSPACINGS_LOG_LEVEL）")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    # 注册子命令
    for router in ROUTERS:
        router.register(subparsers)
    return parser


def dispatch(argv: Sequence[str] | None = None) -> int:
    """
    解析参数并执行子命令

    Returns:
        退出码：0 成功；1 验证未通过；2 参数、定义域或配置错误；3 数值求解未收敛
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse 在参数错误时以 2 退出，--help 时以 0 退出
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    setup_logging(args.log_level or settings.LOG_LEVEL, settings.LOG_FILE)

    try:
        with log_command(args.command):
            return int(args.handler(args))
    except Exception as e:
        return handle_cli_exception(e)


def main() -> None:
    """控制台脚本入口"""
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

"""
命令行公共依赖

各子命令共享的参数定义与解析：设计参数、区域参数、区间、种子和线程数
"""

import argparse
from pathlib import Path

from app.core.config import settings
from app.core.exceptions import ConfigException
from app.schemas.design import ExtendedNonNeg, SampleDesign, Unbounded
from app.services.spacings import SpacingsService
from app.utils.rng import resolve_seed


def parse_extended(text: str) -> ExtendedNonNeg:
    """解析非负扩展实数，接受 inf / ∞"""
    value = text.strip().lower()
    if value in {"inf", "infinity", "∞", "+inf"}:
        return Unbounded.INF
    try:
        number = float(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"无法解析的数值: {text}") from e
    if number != number or number < 0.0 or number == float("inf"):
        raise argparse.ArgumentTypeError(f"必须为非负有限数或 inf: {text}")
    return number


def parse_regime(text: str) -> tuple[ExtendedNonNeg, ExtendedNonNeg]:
    """解析 --regime：c=0,d=inf 或 0,inf"""
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"--regime 需要两个值，例如 c=0,d=0: {text}")
    values: dict[str, ExtendedNonNeg] = {}
    for position, part in enumerate(parts):
        name, _, raw = part.rpartition("=")
        name = name or ("c", "d")[position]
        if name not in {"c", "d"}:
            raise argparse.ArgumentTypeError(f"未知的区域参数: {name}")
        values[name] = parse_extended(raw)
    if set(values) != {"c", "d"}:
        raise argparse.ArgumentTypeError(f"--regime 必须同时给出 c 与 d: {text}")
    return values["c"], values["d"]


def parse_interval(text: str) -> tuple[float, float]:
    """解析 --interval-x/--interval-y：a,b"""
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"区间格式应为 a,b: {text}")
    try:
        lower, upper = float(parts[0]), float(parts[1])
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"无法解析的区间: {text}") from e
    if not upper > lower:
        raise argparse.ArgumentTypeError(f"区间右端点必须大于左端点: {text}")
    return lower, upper


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"需要整数: {text}") from e
    if value < 1:
        raise argparse.ArgumentTypeError(f"需要正整数: {text}")
    return value


def nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"需要整数: {text}") from e
    if value < 0:
        raise argparse.ArgumentTypeError(f"需要非负整数: {text}")
    return value


def common_parser() -> argparse.ArgumentParser:
    """所有子命令共享的参数"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--m", type=positive_int, default=1, help="间距阶数 m（默认 1）")
    parser.add_argument("--seed", type=nonneg_int, default=None, help="主种子（默认读取 MSPACINGS_SEED）")
    parser.add_argument("--threads", type=positive_int, default=None, help="Monte Carlo 工作线程数")
    parser.add_argument("--grid", type=positive_int, default=None, help="网格点数")
    parser.add_argument("--reps", type=positive_int, default=None, help="重复次数")
    parser.add_argument("--alpha", type=float, default=0.05, help="显著性水平")
    parser.add_argument("--out", type=Path, default=None, help="输出文件（默认 stdout）")
    parser.add_argument("--format", choices=["csv", "json"], default=None, help="输出格式")
    return parser


def design_parser() -> argparse.ArgumentParser:
    """样本设计参数"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--n1", type=positive_int, default=None, help="X 样本量")
    parser.add_argument("--n2", type=positive_int, default=None, help="Y 样本量")
    parser.add_argument("--N", type=nonneg_int, default=None, help="间距对数（比值个数为 N+1）")
    parser.add_argument("--P", type=nonneg_int, default=None, help="X 剩余间距数")
    parser.add_argument("--Q", type=nonneg_int, default=None, help="Y 剩余间距数")
    parser.add_argument("--regime", type=parse_regime, default=None, help="区域参数，例如 c=0,d=0 或 c=inf,d=inf")
    return parser


def regime_values(args: argparse.Namespace) -> tuple[ExtendedNonNeg | None, ExtendedNonNeg | None]:
    if args.regime is None:
        return None, None
    return args.regime


def design_from_args(args: argparse.Namespace) -> SampleDesign:
    """由命令行参数解析样本设计"""
    if (args.n1 is None) != (args.n2 is None):
        raise ConfigException(msg="--n1 与 --n2 必须同时给出")
    c, d = regime_values(args)
    return SpacingsService.resolve_design(args.m, args.n1, args.n2, args.N, args.P, args.Q, c, d)


def seed_from_args(args: argparse.Namespace) -> int:
    return resolve_seed(args.seed)


def threads_from_args(args: argparse.Namespace) -> int:
    return args.threads if args.threads is not None else max(1, settings.THREADS)


def output_format(args: argparse.Namespace, default: str, allowed: tuple[str, ...] = ("csv", "json")) -> str:
    fmt = args.format or default
    if fmt not in allowed:
        raise ConfigException(msg=f"该子命令不支持 --format {fmt}", detail={"allowed": list(allowed)})
    return fmt

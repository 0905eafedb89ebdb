"""
test 子命令：基于间距比值的两样本均匀性检验
"""

import argparse
from pathlib import Path
from typing import Any

from app.core.deps import common_parser, output_format, parse_interval, seed_from_args, threads_from_args
from app.services.file_io import FileIOService
from app.services.stest import UniformityTestService

DEFAULT_REPS = 10000


def register(subparsers: Any) -> None:
    """注册 test 子命令"""
    parser = subparsers.add_parser(
        "test",
        parents=[common_parser()],
        help="两样本均匀性检验",
        description="检验 X、Y 是否分别服从声明区间上的均匀分布，输出 JSON 结果",
    )
    parser.add_argument("--x", type=Path, required=True, help="X 样本文件（CSV/TXT/JSON）")
    parser.add_argument("--y", type=Path, required=True, help="Y 样本文件（CSV/TXT/JSON）")
    parser.add_argument("--interval-x", type=parse_interval, default=(0.0, 1.0), help="X 的区间 a,b（默认 0,1）")
    parser.add_argument("--interval-y", type=parse_interval, default=(0.0, 1.0), help="Y 的区间 a,b（默认 0,1）")
    parser.add_argument("--N", type=int, default=None, help="间距对数（默认 min(N1, N2)）")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    """执行 test 子命令"""
    output_format(args, "json", allowed=("json",))
    x = FileIOService.read_sample(args.x)
    y = FileIOService.read_sample(args.y)
    result = UniformityTestService.ratio_uniformity_test(
        x,
        y,
        interval_x=args.interval_x,
        interval_y=args.interval_y,
        m=args.m,
        alpha=args.alpha,
        reps=args.reps or DEFAULT_REPS,
        seed=seed_from_args(args),
        N=args.N,
        grid=args.grid,
        threads=threads_from_args(args),
    )
    FileIOService.write_json(result, args.out)
    return 0

"""
limit 子命令：极限过程 (B∘H_m)_C 的路径与协方差核表
"""

import argparse
from typing import Any

import numpy as np
import pandas as pd

from app.core.deps import common_parser, output_format, parse_regime, seed_from_args, threads_from_args
from app.core.exceptions import ConfigException
from app.services.file_io import FileIOService
from app.services.gausslim import LimitProcessService
from app.utils.grid import make_grid

# 核表默认网格较粗，行数为点数的平方
KERNEL_GRID = 33


def register(subparsers: Any) -> None:
    """注册 limit 子命令"""
    parser = subparsers.add_parser(
        "limit",
        parents=[common_parser()],
        help="极限路径与协方差核",
        description="模拟 (B∘H_m)_C 路径（长表 path,t,value）或输出协方差核 K_C（s,t,k）",
    )
    centering = parser.add_mutually_exclusive_group()
    centering.add_argument("--C", type=float, default=None, help="中心化常数（默认 0，即 B∘H_m）")
    centering.add_argument("--regime", type=parse_regime, default=None, help="由区域参数取 C = 1 ± √R，例如 c=0,d=0")
    parser.add_argument("--sign", choices=["plus", "minus"], default="plus", help="--regime 时 C 的符号")
    parser.add_argument("--paths", type=int, default=1, help="路径条数（默认 1）")
    parser.add_argument("--kernel", action="store_true", help="输出协方差核表而不是路径")
    parser.set_defaults(handler=handle)


def resolve_centering(args: argparse.Namespace) -> float:
    """由 --C 或 --regime 得到中心化常数"""
    if args.regime is not None:
        c, d = args.regime
        params = LimitProcessService.regime(args.m, c, d)
        return params.C_plus if args.sign == "plus" else params.C_minus
    return 0.0 if args.C is None else args.C


def handle(args: argparse.Namespace) -> int:
    """执行 limit 子命令"""
    C = resolve_centering(args)
    fmt = output_format(args, "csv")

    if args.kernel:
        grid = make_grid(args.grid or KERNEL_GRID)
        s, t = np.meshgrid(grid, grid, indexing="ij")
        values = np.asarray(LimitProcessService.kernel_kc(args.m, C, s, t))
        df = pd.DataFrame({"s": s.ravel(), "t": t.ravel(), "k": values.ravel()})
        if fmt == "csv":
            FileIOService.write_csv(df, args.out)
        else:
            FileIOService.write_json({"m": args.m, "C": C, "kernel": df.to_dict(orient="list")}, args.out)
        return 0

    if args.paths < 1:
        raise ConfigException(msg="--paths 必须为正", detail={"paths": args.paths})
    grid = make_grid(args.grid)
    seed = seed_from_args(args)
    paths = LimitProcessService.simulate_limit_paths(args.m, C, grid, args.paths, seed, threads_from_args(args))

    if fmt == "csv":
        df = pd.DataFrame(
            {
                "path": np.repeat(np.arange(args.paths), grid.size),
                "t": np.tile(grid, args.paths),
                "value": paths.ravel(),
            }
        )
        FileIOService.write_csv(df, args.out)
    else:
        payload = {"m": args.m, "C": C, "seed": seed, "grid": grid, "paths": paths}
        FileIOService.write_json(payload, args.out)
    return 0

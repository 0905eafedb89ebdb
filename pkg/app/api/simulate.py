"""
simulate 子命令：在均匀样本下模拟一次 γ_N 路径或比值样本
"""

import argparse
from typing import Any

import numpy as np
import pandas as pd

from app.core.deps import common_parser, design_from_args, design_parser, output_format, seed_from_args
from app.services.file_io import FileIOService
from app.services.spacings import SpacingsService
from app.services.verify import VerificationService


def register(subparsers: Any) -> None:
    """注册 simulate 子命令"""
    parser = subparsers.add_parser(
        "simulate",
        parents=[common_parser(), design_parser()],
        help="模拟 γ_N 路径或间距比值",
        description="抽取两组均匀样本，输出比值经验过程 γ_N 的网格路径或比值 R_k",
    )
    parser.add_argument("--what", choices=["gamma", "ratios"], default="gamma", help="输出内容（默认 gamma）")
    parser.add_argument("--index", type=int, default=0, help="使用第几次重复的随机流（默认 0）")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    """执行 simulate 子命令"""
    design = design_from_args(args)
    seed = seed_from_args(args)
    ratios = VerificationService.uniform_ratios(design, seed, args.index)

    if args.what == "ratios":
        df = pd.DataFrame({"k": np.arange(ratios.size), "r_k": ratios.ratios})
    else:
        path = SpacingsService.empirical_process(ratios, args.grid)
        df = pd.DataFrame({"t": path.grid, "gamma": path.values})

    if output_format(args, "csv") == "csv":
        FileIOService.write_csv(df, args.out)
        return 0

    payload = {
        "design": design.model_dump(mode="json"),
        "seed": seed,
        "index": args.index,
        "r_nm": SpacingsService.r_nm(design),
        "sup_abs": SpacingsService.gamma_sup_abs(ratios),
        "integral": SpacingsService.gamma_integral(ratios),
        args.what: df.to_dict(orient="list"),
    }
    FileIOService.write_json(payload, args.out)
    return 0

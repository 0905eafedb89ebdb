"""
dist 子命令：Beta(m,m) 与 Gamma(2m,1) 的分布函数、密度、分位数和分位数密度
"""

import argparse
from typing import Any

import numpy as np
import pandas as pd

from app.core.deps import common_parser, output_format
from app.core.exceptions import ConfigException
from app.services.distkit import DistributionService
from app.services.file_io import FileIOService, format_float

TAIL_TERMS = ["q3_at0", "q3_at1", "q2_at0", "q2_at1", "Q3_at0", "Q3_at1", "Q2_at0", "Q2_at1"]


def register(subparsers: Any) -> None:
    """注册 dist 子命令"""
    parser = subparsers.add_parser(
        "dist",
        parents=[common_parser()],
        help="分布函数、密度与分位数",
        description="计算 Beta(m,m) / Gamma(2m,1) 的 cdf、pdf、分位数与分位数密度",
    )
    parser.add_argument("--dist", choices=["beta", "gamma"], default="beta", help="分布（默认 beta）")
    op = parser.add_mutually_exclusive_group(required=True)
    op.add_argument("--cdf", type=float, nargs="+", metavar="X", help="分布函数")
    op.add_argument("--pdf", type=float, nargs="+", metavar="X", help="密度")
    op.add_argument("--quantile", type=float, nargs="+", metavar="V", help="分位数")
    op.add_argument("--qdensity", type=float, nargs="+", metavar="U", help="分位数密度 1/pdf(quantile(u))")
    op.add_argument("--tail", choices=TAIL_TERMS, help="尾部主项，取值点由 --at 给出")
    op.add_argument("--table", type=int, metavar="POINTS", help="写出 CSV 表")
    parser.add_argument("--at", type=float, nargs="+", metavar="U", help="--tail 的取值点")
    parser.set_defaults(handler=handle)


def _evaluate(args: argparse.Namespace) -> tuple[str, list[float], np.ndarray]:
    m = args.m
    beta = args.dist == "beta"
    if args.cdf is not None:
        xs = args.cdf
        values = DistributionService.beta_cdf(m, xs) if beta else DistributionService.gamma2m_cdf(m, xs)
        return "cdf", xs, np.asarray(values)
    if args.pdf is not None:
        xs = args.pdf
        values = DistributionService.beta_pdf(m, xs) if beta else DistributionService.gamma2m_pdf(m, xs)
        return "pdf", xs, np.asarray(values)
    if args.quantile is not None:
        xs = args.quantile
        values = DistributionService.beta_quantile(m, xs) if beta else DistributionService.gamma2m_quantile(m, xs)
        return "quantile", xs, np.asarray(values)
    if args.qdensity is not None:
        xs = args.qdensity
        dist = "beta_mm" if beta else "gamma_2m"
        return "qdensity", xs, np.asarray(DistributionService.quantile_density(dist, m, xs))
    if not args.at:
        raise ConfigException(msg="--tail 需要 --at 给出取值点")
    return args.tail, args.at, np.asarray(DistributionService.tail_leading_term(args.tail, m, args.at))


def _table(args: argparse.Namespace) -> pd.DataFrame:
    points = args.table
    if points < 2:
        raise ConfigException(msg="--table 至少需要 2 个点", detail={"points": points})
    m = args.m
    if args.dist == "beta":
        xs = np.linspace(0.0, 1.0, points)
        return pd.DataFrame(
            {"x": xs, "cdf": DistributionService.beta_cdf(m, xs), "pdf": DistributionService.beta_pdf(m, xs)}
        )
    ws = np.arange(1, points + 1) / (points + 1)
    return pd.DataFrame(
        {
            "w": ws,
            "quantile": DistributionService.gamma2m_quantile(m, ws),
            "qdensity": DistributionService.quantile_density("gamma_2m", m, ws),
        }
    )


def handle(args: argparse.Namespace) -> int:
    """执行 dist 子命令"""
    if args.table is not None:
        df = _table(args)
        if output_format(args, "csv") == "csv":
            FileIOService.write_csv(df, args.out)
        else:
            FileIOService.write_json({"dist": args.dist, "m": args.m, "table": df.to_dict(orient="list")}, args.out)
        return 0

    name, xs, values = _evaluate(args)
    fmt = args.format
    if fmt == "json":
        payload = {"dist": args.dist, "m": args.m, "op": name, "x": list(xs), "values": values.tolist()}
        FileIOService.write_json(payload, args.out)
    elif fmt == "csv":
        FileIOService.write_csv(pd.DataFrame({"x": xs, name: values}), args.out)
    else:
        FileIOService.emit("".join(f"{format_float(v)}\n" for v in values), args.out)
    return 0

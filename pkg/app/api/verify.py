"""
verify 子命令：运行 Monte Carlo 比较实验并输出 JSON 报告
"""

import argparse
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from app.core.deps import (
    common_parser,
    design_parser,
    output_format,
    regime_values,
    seed_from_args,
    threads_from_args,
)
from app.core.exceptions import VerificationFailed
from app.schemas.experiment import ExperimentConfig
from app.services.file_io import FileIOService
from app.services.verify import VerificationService

DEFAULT_REPS = 2000


def register(subparsers: Any) -> None:
    """注册 verify 子命令"""
    parser = subparsers.add_parser(
        "verify",
        parents=[common_parser(), design_parser()],
        help="γ_N 与极限族的 Monte Carlo 比较",
        description="比较 γ_N 泛函与极限过程泛函的分布，并检查分块表示的方差与事件恒等式",
    )
    parser.add_argument("--functional", choices=["sup_abs", "integral", "eval_at"], default="sup_abs")
    parser.add_argument("--t", type=float, default=None, help="eval_at 的取值点")
    parser.add_argument("--sign", choices=["plus", "minus"], default="plus", help="C = 1 ± √R 的符号")
    parser.add_argument("--ks-tol", type=float, default=0.07, help="KS 距离阈值")
    parser.add_argument("--var-tol", type=float, default=0.10, help="方差相对误差阈值")
    parser.add_argument("--samples-out", type=Path, default=None, help="泛函样本 CSV（group,value）")
    parser.set_defaults(handler=handle)


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """由命令行参数构造实验配置"""
    c, d = regime_values(args)
    return ExperimentConfig(
        m=args.m,
        n1=args.n1,
        n2=args.n2,
        N=args.N,
        P=args.P,
        Q=args.Q,
        c=c,
        d=d,
        functional=args.functional,
        t=args.t,
        sign=args.sign,
        reps=args.reps or DEFAULT_REPS,
        grid=args.grid,
        seed=seed_from_args(args),
        ks_tolerance=args.ks_tol,
        variance_tolerance=args.var_tol,
    )


def handle(args: argparse.Namespace) -> int:
    """执行 verify 子命令；判据未全部通过时退出码为 1"""
    output_format(args, "json", allowed=("json",))
    config = build_config(args)
    report = VerificationService.run_experiment(config, threads=threads_from_args(args))
    FileIOService.write_json(report, args.out)

    if args.samples_out is not None and report.gamma_sample is not None and report.limit_sample is not None:
        df = pd.DataFrame(
            {
                "group": np.repeat(["gamma_n", "limit"], [report.gamma_sample.size, report.limit_sample.size]),
                "value": np.concatenate([report.gamma_sample, report.limit_sample]),
            }
        )
        FileIOService.write_csv(df, args.samples_out)

    if not report.passed:
        failed = [name for name, ok in report.passed_flags.items() if not ok]
        raise VerificationFailed(msg="验证未通过", detail={"failed": failed})
    return 0

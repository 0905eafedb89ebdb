"""
两样本均匀性检验服务

基于 sup|γ_N| 的检验：临界值由极限过程模拟得到，并支持不等长区间的重参数化
"""

import hashlib
import json
import math
import threading
from collections import OrderedDict
from pathlib import Path

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from app.core.config import settings
from app.core.exceptions import DomainException
from app.schemas.design import SampleDesign
from app.schemas.experiment import GammaNSource, LimitSource, SupAbs
from app.schemas.samples import RatioSample
from app.schemas.stest import CriticalValueEntry, Interval, TestResult
from app.services.distkit import DistributionService
from app.services.spacings import SpacingsService
from app.services.verify import VerificationService
from app.utils.grid import resolve_grid
from app.utils.rng import STREAM_NULL


class CriticalValueCache:
    """
    临界值缓存

    内存中按最近使用保留至多 MAX_ENTRIES 个条目（每条含完整的模拟样本）；
    CACHE_DIR 设置时另以 JSON 文件持久化（cv_<sha1>.json）
    """

    MAX_ENTRIES = 8

    _entries: OrderedDict[str, CriticalValueEntry] = OrderedDict()
    _lock = threading.Lock()

    @staticmethod
    def make_key(m: int, R: float, functional: str, alpha: float, reps: int, grid: int, seed: int) -> str:
        """参数键，浮点数按 repr 保存以保证精确匹配"""
        return json.dumps(
            {
                "m": m,
                "R": repr(float(R)),
                "functional": functional,
                "alpha": repr(float(alpha)),
                "reps": reps,
                "grid": grid,
                "seed": seed,
            },
            sort_keys=True,
        )

    @classmethod
    def sidecar_path(cls, key: str) -> Path | None:
        if settings.CACHE_DIR is None:
            return None
        digest = hashlib.sha1(key.encode("utf-8")).hexdigest()
        return settings.CACHE_DIR / f"cv_{digest}.json"

    @classmethod
    def _remember(cls, key: str, entry: CriticalValueEntry) -> None:
        with cls._lock:
            cls._entries[key] = entry
            cls._entries.move_to_end(key)
            while len(cls._entries) > cls.MAX_ENTRIES:
                evicted, _ = cls._entries.popitem(last=False)
                logger.debug(f"临界值缓存淘汰: {evicted}")

    @classmethod
    def get(cls, key: str) -> CriticalValueEntry | None:
        with cls._lock:
            entry = cls._entries.get(key)
            if entry is not None:
                cls._entries.move_to_end(key)
        if entry is not None:
            logger.debug("临界值缓存命中（内存）")
            return entry

        path = cls.sidecar_path(key)
        if path is None or not path.exists():
            return None
        try:
            entry = CriticalValueEntry.model_validate_json(path.read_text(encoding="utf-8"))
        except ValueError as e:
            logger.warning(f"⚠️ 临界值缓存文件无法解析，忽略: {path} - {e}")
            return None
        if entry.key != key:
            logger.warning(f"⚠️ 临界值缓存文件的键不匹配，忽略: {path}")
            return None
        logger.info(f"临界值缓存命中: {path}")
        cls._remember(key, entry)
        return entry

    @classmethod
    def put(cls, entry: CriticalValueEntry) -> None:
        cls._remember(entry.key, entry)
        path = cls.sidecar_path(entry.key)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(entry.model_dump_json(indent=2), encoding="utf-8")
        logger.info(f"临界值已写入缓存: {path}")

    @classmethod
    def size(cls) -> int:
        with cls._lock:
            return len(cls._entries)

    @classmethod
    def clear(cls) -> None:
        with cls._lock:
            cls._entries.clear()


class UniformityTestService:
    """两样本均匀性检验服务"""

    MIN_CRITICAL_REPS = 1000
    SUPPORTED_FUNCTIONALS = ("sup_abs",)

    @classmethod
    def _check_level(cls, alpha: float) -> None:
        if not 0.0 < alpha < 1.0:
            raise DomainException(msg="显著性水平必须位于 (0, 1)", detail={"alpha": alpha})

    @classmethod
    def critical_value_entry(
        cls,
        m: int,
        R: float,
        functional: str = "sup_abs",
        alpha: float = 0.05,
        reps: int = 10000,
        seed: int = 0,
        grid: int | None = None,
        threads: int | None = None,
    ) -> CriticalValueEntry:
        """模拟 C = 1 + √R 的极限路径泛函，取 (1-α) 分位数"""
        m = DistributionService.check_order(m)
        cls._check_level(alpha)
        if functional not in cls.SUPPORTED_FUNCTIONALS:
            raise DomainException(
                msg=f"不支持的泛函: {functional}", detail={"supported": list(cls.SUPPORTED_FUNCTIONALS)}
            )
        if reps < cls.MIN_CRITICAL_REPS:
            raise DomainException(
                msg=f"临界值模拟至少需要 {cls.MIN_CRITICAL_REPS} 次重复", detail={"reps": reps}
            )
        lower = 1.0 / (2 * m + 1)
        if not (lower - 1e-12 <= R <= 1.0 + 1e-12):
            raise DomainException(msg=f"R 必须位于 [{lower}, 1]", detail={"R": R})

        points = resolve_grid(grid, settings.SUP_GRID)
        key = CriticalValueCache.make_key(m, R, functional, alpha, reps, int(points.size), seed)
        cached = CriticalValueCache.get(key)
        if cached is not None:
            return cached

        C = 1.0 + math.sqrt(min(max(R, 0.0), 1.0))
        logger.info(f"模拟临界值: m={m}, R={R:.6f}, C={C:.6f}, reps={reps}, grid={points.size}")
        source = LimitSource(m=m, C=C)
        draws = np.sort(VerificationService.mc_functional(source, SupAbs(), reps, points, seed, threads))
        entry = CriticalValueEntry(key=key, critical_value=float(np.quantile(draws, 1.0 - alpha)), draws=draws.tolist())
        CriticalValueCache.put(entry)
        return entry

    @classmethod
    def critical_value(
        cls,
        m: int,
        R: float,
        functional: str = "sup_abs",
        alpha: float = 0.05,
        reps: int = 10000,
        seed: int = 0,
        grid: int | None = None,
        threads: int | None = None,
    ) -> float:
        """极限分布下泛函的 (1-α) 分位数"""
        return cls.critical_value_entry(m, R, functional, alpha, reps, seed, grid, threads).critical_value

    @classmethod
    def mc_p_value(cls, statistic: float, draws: ArrayLike) -> float:
        """p̂ = (1 + #{draws ≥ statistic}) / (reps + 1)"""
        sample = np.asarray(draws, dtype=np.float64)
        return float((1 + np.count_nonzero(sample >= statistic)) / (sample.size + 1))

    @classmethod
    def reparametrized_statistic(
        cls,
        x: ArrayLike,
        y: ArrayLike,
        interval_x: Interval,
        interval_y: Interval,
        m: int,
        N: int | None = None,
    ) -> tuple[float, RatioSample]:
        """
        原始单位下构造比值，e ≠ h 时映回等长尺度，返回 (sup|γ_N|, 比值)

        把两个区间同乘 λ、样本做同样的仿射变换时统计量在数学上不变；浮点下只有 λ 为 2 的幂
        时逐位相同，一般的 λ 会引入舍入误差，相对偏差约为 1e-15 量级
        """
        xs = np.asarray(x, dtype=np.float64).reshape(-1)
        ys = np.asarray(y, dtype=np.float64).reshape(-1)
        design = SpacingsService.design_from_sizes(xs.size, ys.size, m, N)
        sx = SpacingsService.raw_spacings(xs, interval_x.lower, interval_x.length, m, design.N)
        sy = SpacingsService.raw_spacings(ys, interval_y.lower, interval_y.length, m, design.N)
        ratios = SpacingsService.spacing_ratios(sx, sy, design)
        e, h = interval_x.length, interval_y.length
        if e != h:
            ratios = RatioSample(ratios=np.asarray(SpacingsService.interval_map(ratios.ratios, e, h)), design=design)
        return SpacingsService.gamma_sup_abs(ratios), ratios

    @classmethod
    def finite_sample_null(
        cls,
        design: SampleDesign,
        reps: int,
        seed: int,
        threads: int | None = None,
    ) -> NDArray[np.float64]:
        """实际设计下 sup|γ_N| 的零分布样本（升序），均匀样本取自 STREAM_NULL 随机流"""
        if reps < 1:
            raise DomainException(msg="重复次数必须至少为 1", detail={"reps": reps})
        source = GammaNSource(design=design, stream=STREAM_NULL)
        return np.sort(VerificationService.mc_functional(source, SupAbs(), reps, None, seed, threads))

    @classmethod
    def ratio_uniformity_test(
        cls,
        x: ArrayLike,
        y: ArrayLike,
        interval_x: Interval | tuple[float, float] = (0.0, 1.0),
        interval_y: Interval | tuple[float, float] = (0.0, 1.0),
        m: int = 1,
        alpha: float = 0.05,
        reps: int = 10000,
        seed: int = 0,
        N: int | None = None,
        grid: int | None = None,
        threads: int | None = None,
    ) -> TestResult:
        """
        两样本均匀性检验

        Args:
            x, y: 原始样本
            interval_x, interval_y: 声明区间，元组形式为 (左端点, 右端点)
            m: 间距阶数
            alpha: 显著性水平
            reps: 零分布模拟次数
            seed: 主种子
            N: 间距对数，默认 min(N1, N2)

        Returns:
            检验结果；N < MIN_ASYMPTOTIC_N 时零分布直接在实际设计下模拟
        """
        cls._check_level(alpha)
        ix = cls._as_interval(interval_x)
        iy = cls._as_interval(interval_y)
        statistic, ratios = cls.reparametrized_statistic(x, y, ix, iy, m, N)
        design = ratios.design
        R = SpacingsService.r_nm(design)

        if design.N >= settings.MIN_ASYMPTOTIC_N:
            entry = cls.critical_value_entry(m, R, "sup_abs", alpha, reps, seed, grid, threads)
            draws = np.asarray(entry.draws)
            cv = entry.critical_value
            method = "asymptotic"
        else:
            logger.warning(
                f"⚠️ N={design.N} < {settings.MIN_ASYMPTOTIC_N}，渐近临界值可能有偏，改为在实际设计下模拟零分布"
            )
            draws = cls.finite_sample_null(design, reps, seed, threads)
            cv = float(np.quantile(draws, 1.0 - alpha))
            method = "finite_sample"

        result = TestResult(
            statistic=statistic,
            critical_value=cv,
            p_value=cls.mc_p_value(statistic, draws),
            decision="reject" if statistic > cv else "accept",
            alpha=alpha,
            mc_reps=int(draws.size),
            method=method,
            R=R,
            design=design,
            interval_x=ix,
            interval_y=iy,
            seed=seed,
        )
        logger.info(f"检验完成: statistic={statistic:.4f}, cv={cv:.4f}, decision={result.decision}")
        return result

    @classmethod
    def _as_interval(cls, value: Interval | tuple[float, float]) -> Interval:
        if isinstance(value, Interval):
            return value
        lower, upper = value
        if not upper > lower:
            raise DomainException(msg="区间右端点必须大于左端点", detail={"interval": [lower, upper]})
        return Interval(lower=lower, length=upper - lower)

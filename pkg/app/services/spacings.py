"""
间距服务

两样本不相交 m-间距、间距比值、比值经验分布函数与经验过程，以及样本设计的计数运算
"""

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.exceptions import ConfigException, DataException, DomainException
from app.schemas.design import ExtendedNonNeg, SampleDesign, is_unbounded
from app.schemas.samples import DisjointSpacings, GridPath, OrderedSample, RatioSample
from app.services.distkit import DistributionService
from app.utils.grid import make_grid, validate_grid


class SpacingsService:
    """间距与比值经验过程服务"""

    # ==================== 样本设计 ====================

    @classmethod
    def design_from_sizes(cls, n1: int, n2: int, m: int, N_override: int | None = None) -> SampleDesign:
        """
        由样本量和阶数计算设计

        N1 = floor((n1+1)/m) - 1，N2 同理；N 默认取 min(N1, N2)
        """
        if n1 < 1 or n2 < 1:
            raise DomainException(msg="样本量必须为正", detail={"n1": n1, "n2": n2})
        if m < 1 or m > min(n1, n2) + 1:
            raise DomainException(msg="阶数 m 必须满足 1 ≤ m ≤ min(n1, n2) + 1", detail={"m": m})
        DistributionService.check_order(m)

        N1 = (n1 + 1) // m - 1
        N2 = (n2 + 1) // m - 1
        N = min(N1, N2) if N_override is None else N_override
        if N < 0 or N > min(N1, N2):
            raise DomainException(msg="N 必须满足 0 ≤ N ≤ min(N1, N2)", detail={"N": N, "N1": N1, "N2": N2})
        return SampleDesign(m=m, n1=n1, n2=n2, N1=N1, N2=N2, N=N, P=N1 - N, Q=N2 - N)

    @classmethod
    def design_from_counts(cls, m: int, N: int, P: int, Q: int) -> SampleDesign:
        """由 (N, P, Q) 反推最小样本量 n = (N+P+1)m - 1"""
        if N < 0 or P < 0 or Q < 0:
            raise DomainException(msg="N/P/Q 必须非负", detail={"N": N, "P": P, "Q": Q})
        n1 = (N + P + 1) * m - 1
        n2 = (N + Q + 1) * m - 1
        if n1 < 1 or n2 < 1:
            raise DomainException(msg="设计对应的样本量为 0", detail={"N": N, "P": P, "Q": Q})
        return cls.design_from_sizes(n1, n2, m, N)

    @classmethod
    def _surplus_from_regime(cls, value: ExtendedNonNeg, N: int, name: str) -> int:
        if is_unbounded(value):
            raise ConfigException(msg=f"{name}=∞ 时必须显式给出 --P/--Q 或样本量", detail={name: "inf"})
        return int(round(float(value) * (N + 1)))

    @classmethod
    def resolve_design(
        cls,
        m: int,
        n1: int | None = None,
        n2: int | None = None,
        N: int | None = None,
        P: int | None = None,
        Q: int | None = None,
        c: ExtendedNonNeg | None = None,
        d: ExtendedNonNeg | None = None,
    ) -> SampleDesign:
        """
        把命令行和实验配置中的各种设计写法统一成 SampleDesign

        - 给出 n1/n2：N 取显式值；否则按区域参数 N+1 = (N1+1)/(1+c) 取较小者；否则取 min(N1, N2)
        - 仅给出 N：P/Q 取显式值，或按 P = round(c(N+1)) 由区域参数换算
        """
        if n1 is not None and n2 is not None:
            if N is None and c is not None and d is not None:
                candidates = []
                for size, value in ((n1, c), (n2, d)):
                    if not is_unbounded(value):
                        candidates.append(((size + 1) // m) // (1.0 + float(value)))
                if not candidates:
                    raise ConfigException(msg="c = d = ∞ 时必须显式给出 --N")
                N = max(0, int(min(candidates)) - 1)
                base = cls.design_from_sizes(n1, n2, m)
                N = min(N, base.N)
            return cls.design_from_sizes(n1, n2, m, N)

        if N is None:
            raise ConfigException(msg="必须给出 --n1/--n2 或 --N")
        if P is None:
            P = cls._surplus_from_regime(c, N, "c") if c is not None else 0
        if Q is None:
            Q = cls._surplus_from_regime(d, N, "d") if d is not None else 0
        return cls.design_from_counts(m, N, P, Q)

    @classmethod
    def r_nm(cls, design: SampleDesign) -> float:
        """有限样本区域常数 R_{N,m} = 1 - m/(2m+1)·[(N+1)/(N1+1) + (N+1)/(N2+1)]"""
        m = design.m
        return 1.0 - m / (2 * m + 1) * ((design.N + 1) / (design.N1 + 1) + (design.N + 1) / (design.N2 + 1))

    # ==================== 间距 ====================

    @classmethod
    def ordered_sample(cls, values: ArrayLike) -> OrderedSample:
        """
        排序并检查原始样本

        Raises:
            DataException: 存在结值或样本不在 (0,1) 内
        """
        raw = np.asarray(values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(raw)):
            raise DataException(msg="样本中存在 NaN 或无穷")
        sorted_values = np.sort(raw)
        if sorted_values.size and (sorted_values[0] <= 0.0 or sorted_values[-1] >= 1.0):
            raise DataException(msg="样本必须位于开区间 (0, 1)")
        cls._check_ties(sorted_values)
        return OrderedSample(values=sorted_values)

    @classmethod
    def _check_ties(cls, sorted_values: NDArray[np.float64]) -> None:
        tied = np.flatnonzero(np.diff(sorted_values) == 0.0)
        if tied.size:
            raise DataException(
                msg="样本中存在结值（连续分布下概率为 0），请去重或放弃该样本",
                detail={"value": float(sorted_values[tied[0]]), "count": int(tied.size)},
            )

    @classmethod
    def _spacing_indices(cls, n: int, m: int, N: int) -> NDArray[np.intp]:
        if N < 0 or (N + 1) * m > n + 1:
            raise DomainException(msg="需要 (N+1)·m ≤ n+1", detail={"n": n, "m": m, "N": N})
        return m * np.arange(N + 2)

    @classmethod
    def disjoint_spacings(cls, sample: OrderedSample | ArrayLike, m: int, N: int) -> DisjointSpacings:
        """不相交 m-间距 S_k = X_{(k+1)m,n} - X_{km,n}，k = 0..N（含哨兵 0 与 1）"""
        if not isinstance(sample, OrderedSample):
            sample = cls.ordered_sample(sample)
        DistributionService.check_order(m)
        idx = cls._spacing_indices(sample.n, m, N)
        values = np.diff(sample.augmented()[idx])
        return DisjointSpacings(values=values, m=m, source_n=sample.n)

    @classmethod
    def raw_spacings(cls, values: ArrayLike, lower: float, length: float, m: int, N: int) -> DisjointSpacings:
        """
        原始单位下的不相交 m-间距，哨兵为区间端点 lower 与 lower + length

        Raises:
            DataException: 样本落在区间外或存在结值
        """
        raw = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))
        upper = lower + length
        if not np.all(np.isfinite(raw)):
            raise DataException(msg="样本中存在 NaN 或无穷")
        if raw.size and (raw[0] <= lower or raw[-1] >= upper):
            raise DataException(
                msg="样本超出声明区间",
                detail={"interval": [lower, upper], "min": float(raw[0]), "max": float(raw[-1])},
            )
        cls._check_ties(raw)
        idx = cls._spacing_indices(raw.size, m, N)
        augmented = np.concatenate(([lower], raw, [upper]))
        return DisjointSpacings(values=np.diff(augmented[idx]), m=m, source_n=int(raw.size))

    @classmethod
    def spacing_ratios(cls, sx: DisjointSpacings, sy: DisjointSpacings, design: SampleDesign) -> RatioSample:
        """R_k = (N1+1)S_{k;X} / ((N1+1)S_{k;X} + (N2+1)S_{k;Y})"""
        if sx.count != design.N + 1 or sy.count != design.N + 1:
            raise DomainException(
                msg="两组间距的个数都必须为 N+1",
                detail={"x": sx.count, "y": sy.count, "N": design.N},
            )
        a = (design.N1 + 1) * sx.values
        b = (design.N2 + 1) * sy.values
        return RatioSample(ratios=a / (a + b), design=design)

    @classmethod
    def ratios_from_samples(cls, x: ArrayLike, y: ArrayLike, m: int, N: int | None = None) -> RatioSample:
        """样本 → 次序统计量 → 间距 → 比值"""
        sx_sample = cls.ordered_sample(x)
        sy_sample = cls.ordered_sample(y)
        design = cls.design_from_sizes(sx_sample.n, sy_sample.n, m, N)
        sx = cls.disjoint_spacings(sx_sample, m, design.N)
        sy = cls.disjoint_spacings(sy_sample, m, design.N)
        return cls.spacing_ratios(sx, sy, design)

    # ==================== 经验分布与经验过程 ====================

    @classmethod
    def empirical_cdf(cls, ratios: RatioSample, x: ArrayLike) -> float | NDArray[np.float64]:
        """H_N(x) = #{k : R_k ≤ x} / (N+1)，右连续"""
        xs = np.asarray(x, dtype=np.float64)
        counts = np.searchsorted(np.sort(ratios.ratios), xs, side="right")
        out = counts / ratios.size
        return float(out) if xs.ndim == 0 else out

    @classmethod
    def gamma_at(cls, ratios: RatioSample, x: ArrayLike) -> float | NDArray[np.float64]:
        """γ_N(x) = √(N+1)·(H_N(x) - H_m(x))，x ∈ [0,1]"""
        xs = np.asarray(x, dtype=np.float64)
        smooth = np.asarray(DistributionService.beta_cdf(ratios.m, xs))
        values = math.sqrt(ratios.size) * (np.asarray(cls.empirical_cdf(ratios, xs)) - smooth)
        return float(values) if xs.ndim == 0 else values

    @classmethod
    def empirical_process(cls, ratios: RatioSample, grid: ArrayLike | int | None = None) -> GridPath:
        """
        网格上的比值经验过程 γ_N

        网格缺少端点时补上 0 与 1（两端的值恒为 0）
        """
        if grid is None or isinstance(grid, int):
            points = make_grid(grid)
        else:
            points = validate_grid(grid)
            if points[0] > 0.0:
                points = np.concatenate(([0.0], points))
            if points[-1] < 1.0:
                points = np.concatenate((points, [1.0]))
        return GridPath(grid=points, values=np.asarray(cls.gamma_at(ratios, points)))

    @classmethod
    def gamma_sup_abs(cls, ratios: RatioSample) -> float:
        """
        sup_x |γ_N(x)| 的精确值

        γ_N 在跳跃点之间为常数减去递增函数，上确界在跳跃点的左右极限处取得
        """
        jumps, counts = np.unique(ratios.ratios, return_counts=True)
        n = ratios.size
        right = np.cumsum(counts) / n
        left = right - counts / n
        smooth = np.asarray(DistributionService.beta_cdf(ratios.m, jumps))
        sup = max(float(np.max(np.abs(right - smooth))), float(np.max(np.abs(left - smooth))))
        return math.sqrt(n) * sup

    @classmethod
    def gamma_integral(cls, ratios: RatioSample) -> float:
        """∫_0^1 γ_N(x) dx = √(N+1)·(1/2 - mean R_k)"""
        return math.sqrt(ratios.size) * (0.5 - float(np.mean(ratios.ratios)))

    # ==================== 区间重参数化 ====================

    @classmethod
    def interval_map(cls, t: ArrayLike, e: float, h: float) -> float | NDArray[np.float64]:
        """t ↦ th / (th + (1-t)e)，把原始单位下的比值映回等长区间的尺度"""
        if e <= 0.0 or h <= 0.0:
            raise DomainException(msg="区间长度必须为正", detail={"e": e, "h": h})
        ts = np.asarray(t, dtype=np.float64)
        out = ts * h / (ts * h + (1.0 - ts) * e)
        return float(out) if ts.ndim == 0 else out

    @classmethod
    def interval_map_inverse(cls, s: ArrayLike, e: float, h: float) -> float | NDArray[np.float64]:
        """interval_map 的逆映射 s ↦ se / (se + (1-s)h)"""
        return cls.interval_map(s, h, e)

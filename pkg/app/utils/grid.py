"""
[0,1] 上的网格
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.config import settings
from app.core.exceptions import DomainException

GridSpec = int | ArrayLike | None


def make_grid(points: int | None = None) -> NDArray[np.float64]:
    """[0,1] 上含端点的等距网格，默认 MC_GRID 个点"""
    size = settings.MC_GRID if points is None else points
    if size < 3:
        raise DomainException(msg="网格至少需要 3 个点", detail={"points": size})
    return np.linspace(0.0, 1.0, size)


def validate_grid(grid: ArrayLike) -> NDArray[np.float64]:
    """检查网格严格递增且位于 [0,1]"""
    arr = np.asarray(grid, dtype=np.float64).reshape(-1)
    if arr.size < 2 or not np.all(np.isfinite(arr)):
        raise DomainException(msg="网格至少需要两个有限点")
    if arr[0] < 0.0 or arr[-1] > 1.0 or np.any(np.diff(arr) <= 0.0):
        raise DomainException(msg="网格必须严格递增且位于 [0, 1]")
    return arr


def resolve_grid(grid: GridSpec, default: int | None = None) -> NDArray[np.float64]:
    """
    把点数或显式网格统一为数组

    显式网格必须以 0 开始、以 1 结束且至少有 3 个点
    """
    if grid is None:
        return make_grid(default)
    if isinstance(grid, int | np.integer):
        return make_grid(int(grid))
    arr = validate_grid(grid)
    if arr.size < 3 or arr[0] != 0.0 or arr[-1] != 1.0:
        raise DomainException(msg="网格必须包含端点 0 与 1 且至少有 3 个点", detail={"points": int(arr.size)})
    return arr

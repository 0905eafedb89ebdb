"""
文件读写服务

样本文件读取、CSV/JSON 结果写出；输出字节只由内容决定
"""

import json
import math
import sys
from io import StringIO
from pathlib import Path
from typing import Any, Literal

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel

from app.core.exceptions import DataException

OutputFormat = Literal["csv", "json"]

# 17 位有效数字，保证浮点数可精确往返
CSV_FLOAT_FORMAT = "%.17g"


def format_float(value: float) -> str:
    """最短可往返的十进制表示"""
    return repr(float(value))


class FileIOService:
    """文件读写服务"""

    # 样本文件扩展名
    SAMPLE_EXTENSIONS = {".csv", ".txt", ".json"}

    @classmethod
    def read_sample(cls, path: Path) -> np.ndarray:
        """
        读取一维样本

        CSV/TXT 取第一列的数值（表头自动跳过），JSON 接受数组或 {"values": [...]}
        """
        if not path.exists():
            raise DataException(msg=f"样本文件不存在: {path}")
        ext = path.suffix.lower()
        if ext not in cls.SAMPLE_EXTENSIONS:
            raise DataException(msg=f"不支持的样本文件类型: {path.name}")

        try:
            if ext == ".json":
                payload = json.loads(path.read_text(encoding="utf-8"))
                values = payload["values"] if isinstance(payload, dict) else payload
                series = pd.Series(values, dtype="float64")
            else:
                df = pd.read_csv(path, header=None, comment="#", skip_blank_lines=True)
                series = pd.to_numeric(df.iloc[:, 0], errors="coerce")
                # 表头行解析为 NaN
                if len(series) and math.isnan(series.iloc[0]):
                    series = series.iloc[1:]
        except DataException:
            raise
        except Exception as e:
            logger.error(f"Sample parsing failed: {e}")
            raise DataException(msg=f"样本文件解析失败: {str(e)}") from e

        if series.isnull().any():
            raise DataException(msg=f"样本文件中存在非数值项: {path.name}")
        if series.empty:
            raise DataException(msg=f"样本文件为空: {path.name}")
        return series.to_numpy(dtype=np.float64)

    @classmethod
    def to_csv_text(cls, df: pd.DataFrame) -> str:
        buffer = StringIO()
        df.to_csv(buffer, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return buffer.getvalue()

    @classmethod
    def to_json_text(cls, payload: BaseModel | dict[str, Any] | list[Any]) -> str:
        """UTF-8 JSON，键顺序由模型字段顺序决定，模型按序列化别名输出"""
        data = cls._convert_to_native(payload)
        return json.dumps(data, ensure_ascii=False, indent=2, allow_nan=False) + "\n"

    @classmethod
    def emit(cls, text: str, out: Path | None) -> None:
        """写入文件；out 为 None 时写到 stdout"""
        if out is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(text.encode("utf-8"))
        logger.info(f"已写出: {out}")

    @classmethod
    def write_csv(cls, df: pd.DataFrame, out: Path | None) -> None:
        cls.emit(cls.to_csv_text(df), out)

    @classmethod
    def write_json(cls, payload: BaseModel | dict[str, Any] | list[Any], out: Path | None) -> None:
        cls.emit(cls.to_json_text(payload), out)

    @classmethod
    def _convert_to_native(cls, data: Any) -> Any:
        """把 numpy 类型转换为 Python 原生类型"""
        if isinstance(data, BaseModel):
            return data.model_dump(mode="json", by_alias=True)
        if isinstance(data, dict):
            return {str(k): cls._convert_to_native(v) for k, v in data.items()}
        if isinstance(data, list | tuple):
            return [cls._convert_to_native(v) for v in data]
        if isinstance(data, np.ndarray):
            return [cls._convert_to_native(v) for v in data.tolist()]
        if isinstance(data, np.bool_):
            return bool(data)
        if isinstance(data, np.integer):
            return int(data)
        if isinstance(data, np.floating):
            return float(data)
        return data

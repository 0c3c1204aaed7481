import json
import math
from pathlib import Path
from typing import Any, Optional

import numpy as np


class NumpyEncoder(json.JSONEncoder):
    """numpy 标量、数组与路径的 JSON 编码器"""

    def default(self, obj: Any) -> Any:
        if isinstance(obj, np.bool_):
            return bool(obj)
        elif isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return _finite_or_text(float(obj))
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        elif isinstance(obj, Path):
            return str(obj)
        return super().default(obj)


def _finite_or_text(value: float) -> Any:
    # JSON 没有 inf，PSNR 可能为无穷
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def json_dumps(data: Any, ensure_ascii: bool = False, indent: Optional[int] = None) -> str:
    """
    统一的JSON序列化函数

    Args:
        data: 要序列化的数据
        ensure_ascii: 是否确保ASCII编码
        indent: 缩进空格数

    Returns:
        JSON字符串
    """
    return json.dumps(data, cls=NumpyEncoder, ensure_ascii=ensure_ascii, indent=indent)


def json_loads(json_str: str) -> Any:
    """统一的JSON反序列化函数"""
    return json.loads(json_str)

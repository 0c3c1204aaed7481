"""
图像、掩码与小波金字塔容器

所有容器在构造后只读，可被多个读者共享。
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, Sequence, Tuple, Union

import numpy as np

from utils.image_io import ImageHandler
from .exceptions import DimensionError, FrameValueError

BAND_NAMES: Tuple[str, ...] = ("LL", "LH", "HL", "HH")
DETAIL_BANDS: Tuple[str, ...] = ("LH", "HL", "HH")

BandKey = Tuple[int, str]


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "平面") -> None:
    """两个平面尺寸不一致时抛出 DimensionError"""
    if a.shape != b.shape:
        raise DimensionError(f"{what}尺寸不匹配", f"{a.shape} vs {b.shape}")


@dataclass(frozen=True)
class GrayFrame:
    """单通道灰度帧，强度归一化到 [0, 1]"""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim != 2 or data.size == 0:
            raise DimensionError("灰度帧必须是非空二维数组", f"shape={data.shape}")
        if not np.all(np.isfinite(data)):
            raise FrameValueError("灰度帧包含非有限值")
        if data.min() < 0.0 or data.max() > 1.0:
            raise FrameValueError("灰度帧取值超出 [0,1]", f"[{data.min()}, {data.max()}]")
        object.__setattr__(self, "data", _readonly(data))

    @classmethod
    def from_flat(cls, width: int, height: int, values: Sequence[float]) -> "GrayFrame":
        """由按行展开的强度序列构造"""
        flat = np.asarray(values, dtype=np.float64)
        if flat.size != width * height:
            raise DimensionError("数据长度与宽高不符", f"{flat.size} != {width}x{height}")
        return cls(flat.reshape(height, width))

    @classmethod
    def from_uint8(cls, pixels: np.ndarray) -> "GrayFrame":
        return cls(np.asarray(pixels, dtype=np.float64) / 255.0)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def to_uint8(self) -> np.ndarray:
        return np.rint(self.data * 255.0).astype(np.uint8)


@dataclass(frozen=True)
class BinaryMask:
    """二值前景掩码，True 表示前景"""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=bool, copy=True)
        if data.ndim != 2 or data.size == 0:
            raise DimensionError("掩码必须是非空二维数组", f"shape={data.shape}")
        object.__setattr__(self, "data", _readonly(data))

    @classmethod
    def empty(cls, height: int, width: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    @property
    def foreground_count(self) -> int:
        return int(np.count_nonzero(self.data))

    def to_uint8(self) -> np.ndarray:
        return self.data.astype(np.uint8) * 255


@dataclass(frozen=True)
class WaveletPyramid:
    """
    非抽取小波金字塔

    bands[level][name] 为与原图同尺寸的系数平面，level 从 1 开始。
    """

    levels: int
    bands: Dict[int, Dict[str, np.ndarray]] = field(repr=False)

    def __post_init__(self):
        if self.levels < 1:
            raise DimensionError("金字塔层数必须 ≥ 1", str(self.levels))
        if sorted(self.bands) != list(range(1, self.levels + 1)):
            raise DimensionError("金字塔层编号不连续", str(sorted(self.bands)))
        shape = None
        frozen: Dict[int, Dict[str, np.ndarray]] = {}
        for level in range(1, self.levels + 1):
            planes = self.bands[level]
            if set(planes) != set(BAND_NAMES):
                raise DimensionError(f"第 {level} 层频带不完整", str(sorted(planes)))
            frozen[level] = {}
            for name in BAND_NAMES:
                plane = np.array(planes[name], dtype=np.float64, copy=True)
                if shape is None:
                    shape = plane.shape
                elif plane.shape != shape:
                    raise DimensionError(f"频带 {name}{level} 尺寸不一致", f"{plane.shape} vs {shape}")
                frozen[level][name] = _readonly(plane)
        object.__setattr__(self, "bands", frozen)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.bands[1]["LL"].shape

    def band(self, level: int, name: str) -> np.ndarray:
        return self.bands[level][name]

    def keys(self) -> Iterator[BandKey]:
        for level in range(1, self.levels + 1):
            for name in BAND_NAMES:
                yield level, name

    def items(self) -> Iterator[Tuple[BandKey, np.ndarray]]:
        for level, name in self.keys():
            yield (level, name), self.bands[level][name]


def load_frame(path: Union[str, Path]) -> GrayFrame:
    """
    读取 8 位灰度 PGM/PNG 帧并归一化

    彩色输入按 Rec.601 权重转换为亮度。

    Args:
        path: 帧文件路径

    Returns:
        GrayFrame 对象
    """
    return GrayFrame(ImageHandler.read_gray(path))


def save_frame(image: Union[GrayFrame, BinaryMask], path: Union[str, Path]) -> Path:
    """保存帧或掩码为 8 位 PGM/PNG（掩码写为 0/255）"""
    return ImageHandler.write_uint8(image.to_uint8(), path)

"""
平稳（非抽取）Haar 小波分解

à trous 形式：第 l 层滤波器间隔 2^(l-1)，周期边界。
低通 {1/2, 1/2} 之和为 1，因此 [0,1] 输入的 LL 平面仍在 [0,1] 内。
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from config.logger import logger
from utils.image_io import ImageHandler
from .exceptions import DimensionError
from .frames import BAND_NAMES, GrayFrame, WaveletPyramid


@dataclass(frozen=True)
class SwtFilters:
    """第 level 层膨胀后的 Haar 滤波器对，taps 为 (偏移, 系数)"""

    level: int

    @property
    def step(self) -> int:
        return 2 ** (self.level - 1)

    @property
    def lowpass(self) -> Tuple[Tuple[int, float], ...]:
        return ((0, 0.5), (self.step, 0.5))

    @property
    def highpass(self) -> Tuple[Tuple[int, float], ...]:
        return ((0, 0.5), (self.step, -0.5))


def _filter(plane: np.ndarray, taps: Tuple[Tuple[int, float], ...], axis: int) -> np.ndarray:
    # out[n] = Σ c · in[n + offset]，周期延拓
    (o0, c0), (o1, c1) = taps
    return c0 * np.roll(plane, -o0, axis=axis) + c1 * np.roll(plane, -o1, axis=axis)


def decompose(frame: Union[GrayFrame, np.ndarray], levels: int) -> WaveletPyramid:
    """
    对帧做 levels 层平稳 Haar 分解

    "rows" 滤波沿竖直方向（axis 0），"cols" 滤波沿水平方向（axis 1）:
    LL = L_rows(L_cols(A)), LH = H_rows(L_cols(A)),
    HL = L_rows(H_cols(A)), HH = H_rows(H_cols(A))。
    第 l 层以第 l-1 层的 LL 为输入。

    Args:
        frame: 灰度帧或二维系数平面
        levels: 分解层数 M

    Returns:
        WaveletPyramid，每层四个与原图同尺寸的频带
    """
    data = frame.data if isinstance(frame, GrayFrame) else np.asarray(frame, dtype=np.float64)
    if levels < 1:
        raise DimensionError("分解层数必须 ≥ 1", str(levels))
    height, width = data.shape
    if min(height, width) < 2 ** levels:
        raise DimensionError(
            f"帧尺寸不足以做 {levels} 层分解",
            f"{width}x{height} < {2 ** levels}"
        )

    bands: Dict[int, Dict[str, np.ndarray]] = {}
    approx = data
    for level in range(1, levels + 1):
        filters = SwtFilters(level)
        low_cols = _filter(approx, filters.lowpass, axis=1)
        high_cols = _filter(approx, filters.highpass, axis=1)
        bands[level] = {
            "LL": _filter(low_cols, filters.lowpass, axis=0),
            "LH": _filter(low_cols, filters.highpass, axis=0),
            "HL": _filter(high_cols, filters.lowpass, axis=0),
            "HH": _filter(high_cols, filters.highpass, axis=0),
        }
        approx = bands[level]["LL"]
    return WaveletPyramid(levels=levels, bands=bands)


def support_size(level: int) -> int:
    """第 level 层系数对应的像素支撑数 N_p = (2^level)^2"""
    if level < 1:
        raise DimensionError("层号必须 ≥ 1", str(level))
    return (2 ** level) ** 2


def band_sigma(band: np.ndarray) -> float:
    """频带全部系数的总体标准差"""
    values = np.asarray(band, dtype=np.float64)
    if values.size == 0:
        raise DimensionError("频带为空")
    return float(np.std(values))


def max_levels(height: int, width: int) -> int:
    """帧尺寸允许的最大分解层数"""
    return min(height, width).bit_length() - 1


def dump_pyramid(pyramid: WaveletPyramid, output_dir: Union[str, Path], prefix: str = "band") -> None:
    """
    以 PGM 导出每个频带，系数仿射拉伸到 0..255，仅用于查看

    Args:
        pyramid: 小波金字塔
        output_dir: 输出目录
        prefix: 文件名前缀
    """
    out = Path(output_dir)
    for (level, name), plane in pyramid.items():
        low, high = float(plane.min()), float(plane.max())
        span = high - low
        scaled = np.zeros(plane.shape) if span <= 0 else (plane - low) / span
        ImageHandler.write_uint8(np.rint(scaled * 255.0).astype(np.uint8), out / f"{prefix}_L{level}_{name}.pgm")
    logger.info(f"已导出 {pyramid.levels * len(BAND_NAMES)} 个频带到 {out}")

"""
均匀 LBP（P=8, R=1）编码、窗口直方图场、直方图交与平坦度比例

编码使用 59 个 bin：58 个均匀模式（循环跳变 ≤ 2）各占一个，其余归入 bin 58。
所有邻域访问均为周期边界。
"""
from dataclasses import dataclass, field
from typing import Tuple

import cv2
import numpy as np

from .exceptions import DimensionError
from .frames import check_same_shape

N_BINS = 59
NONUNIFORM_BIN = 58

# 邻域按圆周顺序排列，第 k 个邻居对应第 k 位
NEIGHBOR_OFFSETS: Tuple[Tuple[int, int], ...] = (
    (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1),
)


def transitions(code: int) -> int:
    """8 位模式的循环 0/1 跳变次数"""
    rotated = ((code >> 1) | ((code & 1) << 7)) & 0xFF
    return bin(code ^ rotated).count("1")


def _build_uniform_lut() -> np.ndarray:
    lut = np.full(256, NONUNIFORM_BIN, dtype=np.uint8)
    next_bin = 0
    for code in range(256):
        if transitions(code) <= 2:
            lut[code] = next_bin
            next_bin += 1
    assert next_bin == NONUNIFORM_BIN
    return lut


UNIFORM_LUT = _build_uniform_lut()
ZEROS_BIN = int(UNIFORM_LUT[0])
ONES_BIN = int(UNIFORM_LUT[255])
# 无跳变的两个模式 + 非均匀 bin，用于平坦度统计
FLAT_BINS: Tuple[int, ...] = (ZEROS_BIN, ONES_BIN, NONUNIFORM_BIN)


@dataclass(frozen=True)
class LbpField:
    """
    单个频带的 LBP 场

    codes: 每像素 0..58 的均匀编码
    counts: 每像素 (2r+1)^2 窗口内 59 个 bin 的计数，形状 (H, W, 59)
    """

    codes: np.ndarray
    counts: np.ndarray = field(repr=False)
    radius: int

    @property
    def window_size(self) -> int:
        return (2 * self.radius + 1) ** 2

    @property
    def histograms(self) -> np.ndarray:
        """归一化直方图，每个像素之和为 1"""
        return self.counts / float(self.window_size)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.codes.shape


def raw_lbp_codes(plane: np.ndarray) -> np.ndarray:
    """
    计算 0..255 的原始 LBP 编码（邻居 ≥ 中心则置位）

    Args:
        plane: 二维系数平面，至少 3x3

    Returns:
        uint8 编码平面
    """
    values = np.asarray(plane, dtype=np.float64)
    if values.ndim != 2 or min(values.shape) < 3:
        raise DimensionError("LBP 需要至少 3x3 的平面", f"shape={values.shape}")
    codes = np.zeros(values.shape, dtype=np.uint8)
    for bit, (dy, dx) in enumerate(NEIGHBOR_OFFSETS):
        neighbor = np.roll(values, shift=(-dy, -dx), axis=(0, 1))
        codes |= (neighbor >= values).astype(np.uint8) << bit
    return codes


def lbp_codes(plane: np.ndarray) -> np.ndarray:
    """均匀 LBP 编码平面（0..58）"""
    return UNIFORM_LUT[raw_lbp_codes(plane)]


def _box_sum(padded: np.ndarray, radius: int) -> np.ndarray:
    """已周期补边数组上的 (2r+1)x(2r+1) 不归一化盒滤波，形状不变"""
    size = 2 * radius + 1
    summed = cv2.boxFilter(padded, -1, (size, size), normalize=False, borderType=cv2.BORDER_CONSTANT)
    # 单通道时 OpenCV 去掉最后一个轴
    return summed.reshape(padded.shape)


def window_sum(values: np.ndarray, radius: int) -> np.ndarray:
    """
    (2r+1)x(2r+1) 周期窗口求和，前两个轴为空间轴

    周期补边后用不归一化的盒滤波逐通道求和，代价与窗口大小无关。
    float32 输入保持 float32，其余浮点按 float64 计算，整数输入返回 int64。
    """
    if radius < 1:
        raise DimensionError("窗口半径必须 ≥ 1", str(radius))
    array = np.asarray(values)
    if array.ndim < 2:
        raise DimensionError("窗口求和需要二维以上数组", f"shape={array.shape}")
    height, width = array.shape[:2]
    channels = array.shape[2:]
    work_dtype = np.float32 if array.dtype == np.float32 else np.float64
    work = np.ascontiguousarray(array.reshape(height, width, -1), dtype=work_dtype)

    padded = np.pad(work, ((radius, radius), (radius, radius), (0, 0)), mode="wrap")
    summed = _box_sum(padded, radius)[radius:radius + height, radius:radius + width]
    summed = summed.reshape((height, width) + channels)
    if np.issubdtype(array.dtype, np.floating):
        return summed
    return np.rint(summed).astype(np.int64)


# 第 b 行为 bin b 的独热向量
_ONE_HOT = np.eye(N_BINS, dtype=np.float32)


def histogram_field(codes: np.ndarray, radius: int) -> LbpField:
    """
    每像素 (2r+1)^2 周期窗口内的 59-bin 直方图

    Args:
        codes: 均匀 LBP 编码平面
        radius: 窗口半径 r

    Returns:
        LbpField（计数形式，histograms 属性给出归一化结果）
    """
    if radius < 1:
        raise DimensionError("窗口半径必须 ≥ 1", str(radius))
    counts = window_sum(_ONE_HOT[codes], radius).astype(np.int32)
    return LbpField(codes=codes, counts=counts, radius=radius)


def compact_count_difference(codes_a: np.ndarray, codes_b: np.ndarray,
                             radius: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    只在两幅编码中出现过的 bin 上计算窗口计数差

    先对二维编码平面周期补边，每个像素写入 +1/−1 两个值，再做一次盒滤波。

    Returns:
        (present, delta)：present 为出现过的 bin 号，
        delta[..., i] 为 bin present[i] 的 n_a − n_b（float32 存放的整数）
    """
    check_same_shape(codes_a, codes_b, "LBP 编码")
    if radius < 1:
        raise DimensionError("窗口半径必须 ≥ 1", str(radius))
    height, width = codes_a.shape
    a = np.asarray(codes_a, dtype=np.intp)
    b = np.asarray(codes_b, dtype=np.intp)
    present = np.flatnonzero(
        np.bincount(a.ravel(), minlength=N_BINS) + np.bincount(b.ravel(), minlength=N_BINS)
    )
    channel = np.zeros(N_BINS, dtype=np.intp)
    channel[present] = np.arange(present.size)

    pad = ((radius, radius), (radius, radius))
    padded_a = channel[np.pad(a, pad, mode="wrap")].ravel()
    padded_b = channel[np.pad(b, pad, mode="wrap")].ravel()
    pixels = np.arange(padded_a.size)
    delta = np.zeros((padded_a.size, present.size), dtype=np.float32)
    delta[pixels, padded_a] = 1.0
    delta[pixels, padded_b] -= 1.0

    shape = (height + 2 * radius, width + 2 * radius, present.size)
    summed = _box_sum(delta.reshape(shape), radius)
    return present, summed[radius:radius + height, radius:radius + width]


def count_difference(codes_a: np.ndarray, codes_b: np.ndarray, radius: int) -> np.ndarray:
    """
    两个编码平面逐像素窗口计数之差 n_a[b] − n_b[b]，形状 (H, W, 59)

    与分别建两个直方图场再相减相同（float32 存放的整数）。
    """
    present, delta = compact_count_difference(codes_a, codes_b, radius)
    full = np.zeros(delta.shape[:2] + (N_BINS,), dtype=np.float32)
    full[:, :, present] = delta
    return full


def build_field(plane: np.ndarray, radius: int) -> LbpField:
    """系数平面 → LBP 编码 → 直方图场"""
    return histogram_field(lbp_codes(plane), radius)


def histogram_intersection(h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
    """
    直方图交核 Σ_b min(h1[b], h2[b])

    沿最后一个轴计算，可用于单个直方图或整个直方图场。
    """
    first = np.asarray(h1, dtype=np.float64)
    second = np.asarray(h2, dtype=np.float64)
    check_same_shape(first, second, "直方图")
    result = np.minimum(first, second).sum(axis=-1)
    return float(result) if result.ndim == 0 else result


def flat_counts(lbp_field: LbpField) -> np.ndarray:
    """窗口内平坦/非均匀模式的个数"""
    return lbp_field.counts[:, :, list(FLAT_BINS)].sum(axis=-1)


def flatness_from_fields(field_bg: LbpField, field_cur: LbpField) -> np.ndarray:
    """由已计算的直方图场得到平坦度比例 x = (n(BG)+n(C))/K ∈ [0,2]"""
    check_same_shape(field_bg.codes, field_cur.codes, "LBP 场")
    if field_bg.radius != field_cur.radius:
        raise DimensionError("LBP 场窗口半径不一致", f"{field_bg.radius} vs {field_cur.radius}")
    return (flat_counts(field_bg) + flat_counts(field_cur)) / float(field_bg.window_size)


def flatness_fraction(codes_bg: np.ndarray, codes_cur: np.ndarray, radius: int) -> np.ndarray:
    """
    平坦度比例场

    Args:
        codes_bg: 背景图的均匀 LBP 编码
        codes_cur: 当前图的均匀 LBP 编码
        radius: 窗口半径

    Returns:
        每像素 x ∈ [0, 2]
    """
    check_same_shape(codes_bg, codes_cur, "LBP 编码")
    flat = np.isin(codes_bg, FLAT_BINS).astype(np.int32) + np.isin(codes_cur, FLAT_BINS).astype(np.int32)
    return window_sum(flat, radius) / float((2 * radius + 1) ** 2)

"""
逐频带、逐像素的前景判决

对每个频带分别维护系数差 (W) 与纹理差 (L) 的高斯统计，
差值超过 μ + k·s 即投前景票。统计只在背景票处更新。
"""
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .exceptions import DimensionError
from .frames import BandKey, check_same_shape
from .lbp import LbpField, compact_count_difference


def coefficient_difference(cur_band: np.ndarray, bg_band: np.ndarray) -> np.ndarray:
    """系数绝对差 |c_cur − c_bg|"""
    check_same_shape(cur_band, bg_band, "频带")
    return np.abs(np.asarray(cur_band, dtype=np.float64) - np.asarray(bg_band, dtype=np.float64))


def texture_difference(cur_field: LbpField, bg_field: LbpField) -> np.ndarray:
    """
    纹理差 1 − Σ_b min(h_cur[b], h_bg[b])

    在整数计数上求交，相同直方图得到严格的 0。
    """
    check_same_shape(cur_field.counts, bg_field.counts, "LBP 直方图场")
    if cur_field.window_size != bg_field.window_size:
        raise DimensionError("LBP 窗口大小不一致", f"{cur_field.window_size} vs {bg_field.window_size}")
    common = np.minimum(cur_field.counts, bg_field.counts).sum(axis=-1)
    return (cur_field.window_size - common) / float(cur_field.window_size)


def texture_difference_from_codes(cur_codes: np.ndarray, bg_codes: np.ndarray, radius: int) -> np.ndarray:
    """
    由两个编码平面直接计算纹理差，结果与 texture_difference 逐位相同

    两个计数向量总和都是 K，故 Σ_b min = K − ½·Σ_b |n_cur − n_bg|，
    只需对计数差做一次窗口求和。未出现的 bin 差为 0，不参与计算。
    """
    _, delta = compact_count_difference(cur_codes, bg_codes, radius)
    window = (2 * radius + 1) ** 2
    # 计数差为不超过 2K 的整数，float32 累加无舍入
    np.abs(delta, out=delta)
    distance = delta.sum(axis=-1).astype(np.float64)
    return (distance / 2.0) / float(window)


@dataclass
class BandDecisionState:
    """
    单个频带单个通道的差值统计

    mean/variance 为逐像素的指数滑动估计，updates 为已更新次数。
    """

    shape: Tuple[int, int]
    variance_floor: float = 1e-6
    mean: np.ndarray = field(init=False, repr=False)
    variance: np.ndarray = field(init=False, repr=False)
    updates: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.mean = np.zeros(self.shape, dtype=np.float64)
        self.variance = np.full(self.shape, self.variance_floor, dtype=np.float64)
        self.updates = np.zeros(self.shape, dtype=np.int64)

    def threshold(self, k: float) -> np.ndarray:
        return self.mean + k * np.sqrt(self.variance)

    def vote(self, diff: np.ndarray, k: float, learning_rate: float,
             force_background: bool = False) -> np.ndarray:
        """
        判决并更新统计

        Args:
            diff: 差值平面
            k: 判决倍数
            learning_rate: 基础学习率，早期按 max(rate, 1/n) 放大
            force_background: 预热期强制全部投背景票

        Returns:
            布尔前景票平面
        """
        if k <= 0:
            raise ValueError(f"k 必须 > 0: {k}")
        diff = np.asarray(diff, dtype=np.float64)
        if diff.shape != self.shape:
            raise DimensionError("差值平面尺寸与判决状态不匹配", f"{diff.shape} vs {self.shape}")

        if force_background:
            votes = np.zeros(self.shape, dtype=bool)
        else:
            votes = diff > self.threshold(k)

        update = ~votes
        self.updates[update] += 1
        rate = np.where(update, np.maximum(learning_rate, 1.0 / np.maximum(self.updates, 1)), 0.0)
        delta = diff - self.mean
        self.mean = self.mean + rate * delta
        self.variance = (1.0 - rate) * (self.variance + rate * delta ** 2)
        self.variance = np.maximum(self.variance, self.variance_floor)
        np.maximum(self.mean, 0.0, out=self.mean)
        return votes


@dataclass
class VotePlanes:
    """所有频带的系数票与纹理票"""

    coefficient: Dict[BandKey, np.ndarray] = field(default_factory=dict)
    texture: Dict[BandKey, np.ndarray] = field(default_factory=dict)

    def keys(self):
        return list(self.coefficient)

    def check(self, shape: Tuple[int, int]) -> None:
        if set(self.coefficient) != set(self.texture):
            raise DimensionError("系数票与纹理票的频带集合不一致")
        for key in self.coefficient:
            for plane in (self.coefficient[key], self.texture[key]):
                if plane.shape != shape:
                    raise DimensionError(f"频带 {key} 的票平面尺寸不匹配", f"{plane.shape} vs {shape}")

"""
三类投票权重：噪声权重 ω_n、纹理引导权重 ω_tW/ω_tL、平移权重 ω_c
"""
from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from .exceptions import DimensionError
from .frames import DETAIL_BANDS, BAND_NAMES, BandKey, WaveletPyramid

# 高斯分布 |x| 中值与 σ 之比
MAD_SCALE = 0.6745


def noise_weight(sigma_band: float, sigma_noise: float) -> float:
    """
    ω_n = (σ_s − σ_n) / σ_s，σ_s ≤ σ_n 或 σ_s = 0 时为 0

    Args:
        sigma_band: 频带标准差 σ_s
        sigma_noise: 噪声标准差 σ_n

    Returns:
        [0, 1] 内的权重
    """
    if sigma_band <= 0.0 or sigma_band <= sigma_noise:
        return 0.0
    return (sigma_band - sigma_noise) / sigma_band


def estimate_noise_sigma(pyramid: WaveletPyramid) -> float:
    """第一层 HH 频带的稳健噪声估计 median(|HH_1|) / 0.6745"""
    if pyramid.levels < 1:
        raise DimensionError("金字塔至少需要一层")
    return float(np.median(np.abs(pyramid.band(1, "HH")))) / MAD_SCALE


def flat_to_unit(x: np.ndarray) -> np.ndarray:
    """f(x) = clamp(x/2, 0, 1)"""
    return np.clip(np.asarray(x, dtype=np.float64) / 2.0, 0.0, 1.0)


def texture_weights(flatness: Mapping[str, np.ndarray]) -> Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray]]:
    """
    单层的纹理引导权重

    平坦区域中细节频带的权重被压低，决策转由 LL 频带主导。

    Args:
        flatness: 键为 LL/LH/HL/HH 的平坦度比例平面

    Returns:
        (ω_tW, ω_tL)，各为以频带名为键的平面字典
    """
    if set(flatness) != set(BAND_NAMES):
        raise DimensionError("平坦度平面需要包含四个频带", str(sorted(flatness)))
    shape = flatness["LL"].shape
    for name in BAND_NAMES:
        if flatness[name].shape != shape:
            raise DimensionError(f"频带 {name} 平坦度尺寸不一致", f"{flatness[name].shape} vs {shape}")

    f = {name: flat_to_unit(flatness[name]) for name in BAND_NAMES}
    texture_l = {name: 1.0 - f[name] for name in BAND_NAMES}
    texture_w = {name: 1.0 - f[name] for name in DETAIL_BANDS}
    texture_w["LL"] = 1.0 + 2.0 * sum(f[name] for name in DETAIL_BANDS) + f["LL"]
    return texture_w, texture_l


def translation_weight(level: int, alpha: float) -> float:
    """
    平移权重：S×S 支撑窗口内 ρ(d)=α^d 的平均值

    S = 2^level，锚点 ((S−1)//2, (S−1)//2)，d 为切比雪夫距离。
    """
    if level < 1:
        raise DimensionError("层号必须 ≥ 1", str(level))
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"α 必须在 (0,1) 内: {alpha}")
    size = 2 ** level
    anchor = (size - 1) // 2
    offsets = np.abs(np.arange(size) - anchor)
    distance = np.maximum(offsets[:, None], offsets[None, :])
    return float(np.sum(alpha ** distance) / (size * size))


def translation_table(levels: int, alpha: float) -> Dict[int, float]:
    """预先计算 1..levels 的平移权重"""
    return {level: translation_weight(level, alpha) for level in range(1, levels + 1)}


@dataclass
class WeightSet:
    """
    一帧的全部权重

    noise: 每频带标量 ω_n
    translation: 每层标量 ω_c（同层四个频带共享）
    coefficient / texture: 每频带逐像素的 ω_tW / ω_tL
    """

    noise: Dict[BandKey, float] = field(default_factory=dict)
    translation: Dict[int, float] = field(default_factory=dict)
    coefficient: Dict[BandKey, np.ndarray] = field(default_factory=dict)
    texture: Dict[BandKey, np.ndarray] = field(default_factory=dict)

    def band_factor(self, key: BandKey) -> float:
        """ω_n · ω_c"""
        return self.noise[key] * self.translation[key[0]]

    def scaled(self, factor: float) -> "WeightSet":
        """所有噪声权重乘以同一正数（等价于整体缩放投票）"""
        return WeightSet(
            noise={key: value * factor for key, value in self.noise.items()},
            translation=dict(self.translation),
            coefficient=dict(self.coefficient),
            texture=dict(self.texture),
        )

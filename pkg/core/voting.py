"""
加权投票融合与阈值判决
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import cv2
import numpy as np

from utils.image_io import ImageHandler
from .decisions import VotePlanes
from .exceptions import DimensionError
from .frames import BinaryMask
from .weights import WeightSet


@dataclass(frozen=True)
class VoteMap:
    """逐像素累计票数 V 与最大可得票数 V_max"""

    votes: np.ndarray
    max_votes: np.ndarray

    def __post_init__(self):
        if self.votes.shape != self.max_votes.shape:
            raise DimensionError("V 与 V_max 尺寸不一致", f"{self.votes.shape} vs {self.max_votes.shape}")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.votes.shape

    def ratio(self) -> np.ndarray:
        """V / V_max，V_max 为 0 处记为 0"""
        out = np.zeros(self.shape, dtype=np.float64)
        np.divide(self.votes, self.max_votes, out=out, where=self.max_votes > 0)
        return out

    def save(self, path: Union[str, Path]) -> Path:
        """以 8 位 PGM 导出 V/V_max，仅用于调试"""
        return ImageHandler.write_uint8(np.rint(self.ratio() * 255.0).astype(np.uint8), path)


def accumulate(votes: VotePlanes, weights: WeightSet) -> VoteMap:
    """
    V = Σ_i ω_ni · ω_ci · (ω_tWi · V_Wi + ω_tLi · V_Li)

    同时给出全部票为 1 时的 V_max。

    Args:
        votes: 所有频带的布尔票平面
        weights: 本帧的权重集合

    Returns:
        VoteMap
    """
    keys = sorted(votes.keys())
    if not keys:
        raise DimensionError("没有任何频带的票")
    shape = votes.coefficient[keys[0]].shape
    votes.check(shape)

    total = np.zeros(shape, dtype=np.float64)
    maximum = np.zeros(shape, dtype=np.float64)
    for key in keys:
        w_coef = np.broadcast_to(weights.coefficient[key], shape)
        w_tex = np.broadcast_to(weights.texture[key], shape)
        factor = weights.band_factor(key)
        total += factor * (w_coef * votes.coefficient[key] + w_tex * votes.texture[key])
        maximum += factor * (w_coef + w_tex)
    return VoteMap(votes=total, max_votes=maximum)


def threshold(vote_map: VoteMap, tau: float) -> BinaryMask:
    """前景当且仅当 V > τ · V_max"""
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"τ 必须在 (0,1] 内: {tau}")
    return BinaryMask(vote_map.votes > tau * vote_map.max_votes)


def postprocess(mask: BinaryMask, enabled: bool) -> BinaryMask:
    """可选的一次 3x3 中值滤波"""
    if not enabled:
        return mask
    return BinaryMask(cv2.medianBlur(mask.to_uint8(), 3) > 0)

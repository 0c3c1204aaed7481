"""
背景模型

GmmBackgroundModel: 简化的 MOG2 式逐像素自适应高斯混合模型
StaticBackground: 由前 n 帧中值构成的固定背景
二者都实现 BackgroundProvider 接口，检测流程可任意替换。
"""
from pathlib import Path
from typing import Dict, Mapping, Optional, Protocol, Sequence, Union, runtime_checkable

import numpy as np

from config.logger import logger
from .exceptions import CheckpointError, DimensionError, EmptyInputError
from .frames import BinaryMask, GrayFrame

CHECKPOINT_VERSION = 1

# MOG2 的默认初始方差 15（8 位强度）换算到 [0,1]
DEFAULT_INITIAL_VARIANCE = 15.0 / 255.0 ** 2


@runtime_checkable
class BackgroundProvider(Protocol):
    """背景图提供者接口"""

    def update_and_extract(self, frame: GrayFrame) -> GrayFrame:
        ...


class GmmBackgroundModel:
    """
    逐像素高斯混合背景模型

    每像素最多 max_gaussians 个分量 (weight, mean, variance)，按权重降序保存。
    有效学习率为 max(learning_rate, 1/n)，n 为该像素已更新次数，
    因此第一帧直接初始化模型。
    """

    def __init__(self, height: int, width: int, max_gaussians: int = 5,
                 learning_rate: float = 0.005, decision_k: float = 2.5,
                 variance_floor: float = 1e-4, variance_ceiling: float = 0.25,
                 initial_variance: float = DEFAULT_INITIAL_VARIANCE):
        if max_gaussians < 1:
            raise ValueError("max_gaussians 必须 ≥ 1")
        self.height = height
        self.width = width
        self.max_gaussians = max_gaussians
        self.learning_rate = learning_rate
        self.decision_k = decision_k
        self.variance_floor = variance_floor
        self.variance_ceiling = variance_ceiling
        self.initial_variance = float(np.clip(initial_variance, variance_floor, variance_ceiling))

        shape = (height, width, max_gaussians)
        self.weights = np.zeros(shape, dtype=np.float64)
        self.means = np.zeros(shape, dtype=np.float64)
        self.variances = np.full(shape, self.initial_variance, dtype=np.float64)
        self.counts = np.zeros((height, width), dtype=np.int64)

    @classmethod
    def from_config(cls, config, height: int, width: int) -> "GmmBackgroundModel":
        return cls(
            height, width,
            max_gaussians=config.max_gaussians,
            learning_rate=config.learning_rate,
            decision_k=config.decision_k,
            variance_floor=config.variance_floor,
            variance_ceiling=config.variance_ceiling,
        )

    @property
    def shape(self):
        return self.height, self.width

    def _check(self, frame: GrayFrame) -> np.ndarray:
        if frame.shape != self.shape:
            raise DimensionError("帧尺寸与背景模型不匹配", f"{frame.shape} vs {self.shape}")
        return frame.data

    def background_image(self) -> GrayFrame:
        """当前主分量（权重最大）的均值图"""
        return GrayFrame(np.clip(self.means[:, :, 0], 0.0, 1.0))

    def foreground_mask(self, frame: GrayFrame) -> BinaryMask:
        """
        仅基于强度的判决：偏离主分量超过 k·σ 即为前景

        在 update_and_extract 之前调用，作为对比基线。
        """
        x = self._check(frame)
        deviation = np.abs(x - self.means[:, :, 0])
        foreground = deviation > self.decision_k * np.sqrt(self.variances[:, :, 0])
        foreground &= self.counts > 0
        return BinaryMask(foreground)

    def update_and_extract(self, frame: GrayFrame, learning_rate: Optional[float] = None) -> GrayFrame:
        """
        用新帧更新模型并返回背景图

        Args:
            frame: 当前帧
            learning_rate: 覆盖默认学习率

        Returns:
            背景图（主分量均值）
        """
        x = self._check(frame)[:, :, None]
        base_rate = self.learning_rate if learning_rate is None else learning_rate

        self.counts += 1
        rate = np.maximum(base_rate, 1.0 / self.counts)[:, :, None]

        active = self.weights > 0
        within = np.abs(x - self.means) <= self.decision_k * np.sqrt(self.variances)
        match = active & within
        matched_any = match.any(axis=2)
        first = np.argmax(match, axis=2)

        component = np.arange(self.max_gaussians)[None, None, :]
        owner = matched_any[:, :, None] & (component == first[:, :, None])

        # 匹配像素：权重、均值、方差按学习率更新
        self.weights = (1.0 - rate) * self.weights + rate * owner
        rho = np.where(owner, np.minimum(1.0, rate / np.maximum(self.weights, 1e-12)), 0.0)
        delta = x - self.means
        self.means = self.means + rho * delta
        self.variances = self.variances + rho * (delta ** 2 - self.variances)

        # 未匹配像素：替换最弱分量
        spawn = (~matched_any)[:, :, None] & (component == self.max_gaussians - 1)
        self.means = np.where(spawn, x, self.means)
        self.variances = np.where(spawn, self.initial_variance, self.variances)
        self.weights = np.where(spawn, rate, self.weights)

        self.variances = np.clip(self.variances, self.variance_floor, self.variance_ceiling)
        self.weights /= self.weights.sum(axis=2, keepdims=True)

        order = np.argsort(-self.weights, axis=2, kind="stable")
        self.weights = np.take_along_axis(self.weights, order, axis=2)
        self.means = np.take_along_axis(self.means, order, axis=2)
        self.variances = np.take_along_axis(self.variances, order, axis=2)

        return self.background_image()

    def to_arrays(self) -> Dict[str, np.ndarray]:
        """模型状态数组（检查点内容，不含版本号）"""
        return {
            "weights": self.weights,
            "means": self.means,
            "variances": self.variances,
            "counts": self.counts,
            "hyper": np.array([
                self.learning_rate, self.decision_k, self.variance_floor,
                self.variance_ceiling, self.initial_variance,
            ]),
        }

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray]) -> "GmmBackgroundModel":
        """由 to_arrays 的结果重建模型；缺字段时抛出 KeyError"""
        weights = np.asarray(arrays["weights"], dtype=np.float64)
        if weights.ndim != 3:
            raise ValueError(f"weights 必须是三维数组: {weights.shape}")
        height, width, max_gaussians = weights.shape
        learning_rate, decision_k, floor, ceiling, initial = (float(v) for v in arrays["hyper"])
        model = cls(height, width, max_gaussians, learning_rate, decision_k, floor, ceiling, initial)
        model.weights = weights
        model.means = np.asarray(arrays["means"], dtype=np.float64)
        model.variances = np.asarray(arrays["variances"], dtype=np.float64)
        model.counts = np.asarray(arrays["counts"], dtype=np.int64)
        for name in ("means", "variances"):
            if getattr(model, name).shape != weights.shape:
                raise ValueError(f"{name} 形状与 weights 不一致")
        if model.counts.shape != (height, width):
            raise ValueError("counts 形状与帧尺寸不一致")
        return model

    def save_checkpoint(self, path: Union[str, Path]) -> Path:
        """保存为带版本号的 .npz 检查点"""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(target, format_version=np.int64(CHECKPOINT_VERSION), **self.to_arrays())
        logger.info(f"背景模型检查点已保存: {target}")
        return target

    @classmethod
    def load_checkpoint(cls, path: Union[str, Path]) -> "GmmBackgroundModel":
        """从 .npz 检查点恢复模型"""
        source = Path(path)
        try:
            with np.load(source) as archive:
                version = int(archive["format_version"])
                if version != CHECKPOINT_VERSION:
                    raise CheckpointError("检查点版本不支持", f"{source}: v{version}")
                model = cls.from_arrays({name: archive[name] for name in archive.files})
        except CheckpointError:
            raise
        except (OSError, KeyError, ValueError) as e:
            raise CheckpointError("无法读取检查点", f"{source}: {e}") from e

        logger.info(f"背景模型检查点已加载: {source} ({model.width}x{model.height}, K={model.max_gaussians})")
        return model


def static_background(frames: Sequence[GrayFrame]) -> GrayFrame:
    """
    前 n 帧的逐像素中值（偶数帧取中间两值的均值）

    Args:
        frames: 至少一帧

    Returns:
        背景图
    """
    if len(frames) == 0:
        raise EmptyInputError("静态背景至少需要一帧")
    shape = frames[0].shape
    for frame in frames:
        if frame.shape != shape:
            raise DimensionError("帧尺寸不一致", f"{frame.shape} vs {shape}")
    return GrayFrame(np.median(np.stack([f.data for f in frames]), axis=0))


class StaticBackground:
    """固定背景提供者"""

    def __init__(self, background: GrayFrame):
        self.background = background

    @classmethod
    def from_frames(cls, frames: Sequence[GrayFrame]) -> "StaticBackground":
        return cls(static_background(frames))

    @property
    def shape(self):
        return self.background.shape

    def update_and_extract(self, frame: GrayFrame) -> GrayFrame:
        if frame.shape != self.background.shape:
            raise DimensionError("帧尺寸与静态背景不匹配", f"{frame.shape} vs {self.background.shape}")
        return self.background

"""
带精确真值的合成伪装序列生成器

目标与被遮挡背景的平均强度相同，只在纹理方向上不同。
"""
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from config.logger import logger
from utils.image_io import ImageHandler
from .exceptions import ScenarioError
from .frames import BinaryMask, GrayFrame, save_frame
from .lbp import histogram_intersection
from .schemas import SynthScenario


@dataclass(frozen=True)
class CleanFrame:
    """加噪声之前的一帧"""

    image: np.ndarray
    background: np.ndarray
    truth: np.ndarray


def _texture(kind: str, shape: Tuple[int, int], amplitude: float, period: float,
             orientation: float, tile: Optional[np.ndarray]) -> np.ndarray:
    height, width = shape
    if kind == "constant" or amplitude == 0.0:
        return np.zeros(shape)
    if kind == "grating":
        theta = np.deg2rad(orientation)
        y, x = np.mgrid[0:height, 0:width].astype(np.float64)
        return amplitude * np.sin(2.0 * np.pi * (x * np.cos(theta) + y * np.sin(theta)) / period)
    if kind == "noise_texture":
        reps = (-(-height // tile.shape[0]), -(-width // tile.shape[1]))
        return amplitude * np.tile(tile, reps)[:height, :width]
    raise ScenarioError("未知纹理类型", kind)


def _noise_tile(rng: np.random.Generator, size: int) -> np.ndarray:
    tile = rng.standard_normal((size, size))
    tile -= tile.mean()
    return tile / np.abs(tile).max()


class SceneRenderer:
    """按场景参数逐帧渲染，所有随机性来自 scenario.seed 派生的子种子"""

    def __init__(self, scenario: SynthScenario):
        self.scenario = scenario
        seeds = np.random.SeedSequence(scenario.seed).spawn(scenario.frames + 2)
        self._frame_seeds = seeds[2:]
        bg_tile = _noise_tile(np.random.default_rng(seeds[0]), scenario.texture_tile)
        obj_tile = _noise_tile(np.random.default_rng(seeds[1]), scenario.texture_tile)

        shape = (scenario.height, scenario.width)
        self.background = scenario.background_level + _texture(
            scenario.background, shape, scenario.background_amplitude,
            scenario.background_period, scenario.background_orientation, bg_tile,
        )
        box = (scenario.object_height, scenario.object_width)
        self.object_pattern = _texture(
            scenario.object_texture, box, scenario.object_amplitude,
            scenario.object_period, scenario.object_orientation, obj_tile,
        )
        self.object_support = self._support(box)
        self.check_trajectory()

    def _support(self, box: Tuple[int, int]) -> np.ndarray:
        height, width = box
        if self.scenario.object_shape == "ellipse":
            y, x = np.mgrid[0:height, 0:width].astype(np.float64)
            cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
            ry, rx = height / 2.0, width / 2.0
            return ((y - cy) / ry) ** 2 + ((x - cx) / rx) ** 2 <= 1.0
        return np.ones(box, dtype=bool)

    def position(self, index: int) -> Optional[Tuple[int, int]]:
        """第 index 帧目标左上角 (x, y)，目标未出现时为 None"""
        s = self.scenario
        if s.object_shape == "none" or index < s.object_enter_frame:
            return None
        elapsed = index - s.object_enter_frame
        x = int(np.floor(s.object_x + s.object_velocity_x * elapsed + 0.5))
        y = int(np.floor(s.object_y + s.object_velocity_y * elapsed + 0.5))
        return x, y

    def check_trajectory(self) -> None:
        """目标在任一帧越出画面时抛出 ScenarioError"""
        s = self.scenario
        for index in range(s.frames):
            pos = self.position(index)
            if pos is None:
                continue
            x, y = pos
            if x < 0 or y < 0 or x + s.object_width > s.width or y + s.object_height > s.height:
                raise ScenarioError(
                    "目标越出画面",
                    f"帧 {index}: 位置 ({x},{y}) 尺寸 {s.object_width}x{s.object_height}，画面 {s.width}x{s.height}"
                )

    def render_clean(self, index: int) -> CleanFrame:
        """渲染不含噪声的一帧及其真值"""
        s = self.scenario
        image = self.background.copy()
        truth = np.zeros(image.shape, dtype=bool)
        pos = self.position(index)
        if pos is not None:
            x, y = pos
            rows = slice(y, y + s.object_height)
            cols = slice(x, x + s.object_width)
            support = self.object_support
            covered_mean = self.background[rows, cols][support].mean()
            pattern = self.object_pattern - self.object_pattern[support].mean()
            region = image[rows, cols]
            region[support] = covered_mean + pattern[support]
            truth[rows, cols] = support
        return CleanFrame(np.clip(image, 0.0, 1.0), self.background, truth)

    def render(self, index: int) -> Tuple[GrayFrame, BinaryMask]:
        clean = self.render_clean(index)
        image = clean.image
        if self.scenario.noise_sigma > 0:
            rng = np.random.default_rng(self._frame_seeds[index])
            image = image + rng.normal(0.0, self.scenario.noise_sigma, image.shape)
        return GrayFrame(np.clip(image, 0.0, 1.0)), BinaryMask(clean.truth)


def generate(scenario: SynthScenario) -> Tuple[List[GrayFrame], List[BinaryMask]]:
    """
    生成整段序列

    Args:
        scenario: 场景描述

    Returns:
        (帧列表, 真值掩码列表)，给定种子时结果确定
    """
    renderer = SceneRenderer(scenario)
    frames, truths = [], []
    for index in range(scenario.frames):
        frame, truth = renderer.render(index)
        frames.append(frame)
        truths.append(truth)
    logger.info(
        f"已生成 {scenario.frames} 帧 {scenario.width}x{scenario.height} 合成序列 "
        f"(background={scenario.background}, object={scenario.object_shape}/{scenario.object_texture}, seed={scenario.seed})"
    )
    return frames, truths


def camouflage_intersection(scenario: SynthScenario, index: int, bins: int = 31) -> float:
    """
    目标区域与其遮挡背景的强度直方图交

    在无噪声帧上计算；目标未出现时返回 1.0。
    bin 数取奇数，使 0.5 落在 bin 中心而不是边界上。
    """
    clean = SceneRenderer(scenario).render_clean(index)
    if not clean.truth.any():
        return 1.0
    edges = np.linspace(0.0, 1.0, bins + 1)
    obj_hist, _ = np.histogram(clean.image[clean.truth], bins=edges)
    bg_hist, _ = np.histogram(clean.background[clean.truth], bins=edges)
    return histogram_intersection(obj_hist / obj_hist.sum(), bg_hist / bg_hist.sum())


def write_sequence(frames: List[GrayFrame], truths: List[BinaryMask],
                   output_dir: Union[str, Path]) -> Tuple[Path, Path]:
    """
    写出 frames/ 与 truth/ 两个子目录，文件名为 frame_000001.pgm 起的零填充编号

    Returns:
        (帧目录, 真值目录)
    """
    root = Path(output_dir)
    frame_dir, truth_dir = root / "frames", root / "truth"
    for index, (frame, truth) in enumerate(zip(frames, truths), start=1):
        name = ImageHandler.frame_name(index)
        save_frame(frame, frame_dir / name)
        save_frame(truth, truth_dir / name)
    logger.info(f"合成序列已写出到 {root}")
    return frame_dir, truth_dir

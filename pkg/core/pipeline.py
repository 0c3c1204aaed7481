"""
TGWV 前景检测流程

背景模型 → 当前图/背景图各做 M 层平稳小波分解 → 每频带 LBP 编码
→ 系数差与窗口纹理差 → 每频带判决 → 三类权重 → 加权投票 → 掩码

背景图未变化时复用其分解与编码。
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from config.logger import logger
from utils.json_helper import json_dumps
from utils.validators import FrameValidator
from .background import BackgroundProvider, GmmBackgroundModel, StaticBackground
from .decisions import BandDecisionState, VotePlanes, coefficient_difference, texture_difference_from_codes
from .exceptions import CheckpointError, DimensionError, EmptyInputError, FrameLoadError, TgwvError
from .frames import BAND_NAMES, BandKey, BinaryMask, GrayFrame, WaveletPyramid, load_frame, save_frame
from .lbp import flatness_fraction, lbp_codes
from .schemas import DetectorConfig
from .swt import band_sigma, decompose, max_levels
from .voting import VoteMap, accumulate, postprocess, threshold
from .weights import WeightSet, estimate_noise_sigma, noise_weight, texture_weights, translation_table

CHANNELS = ("W", "L")
DETECTOR_CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class FrameResult:
    """单帧检测结果"""

    index: int
    mask: BinaryMask
    vote_map: VoteMap
    burn_in: bool
    noise_sigma: float = 0.0

    @property
    def foreground_count(self) -> int:
        return self.mask.foreground_count


class Detector(Protocol):
    """逐帧检测器接口"""

    def process_frame(self, frame: GrayFrame) -> FrameResult:
        ...


def effective_levels(config: DetectorConfig, height: int, width: int) -> int:
    """
    帧太小时把分解层数降到 ⌊log2(min(w,h))⌋

    Args:
        config: 检测器配置
        height: 帧高
        width: 帧宽

    Returns:
        实际使用的层数
    """
    if min(height, width) < 3:
        raise DimensionError("帧尺寸过小", f"{width}x{height}")
    limit = max_levels(height, width)
    if config.levels > limit:
        logger.warning(f"帧尺寸 {width}x{height} 只支持 {limit} 层分解，levels 从 {config.levels} 降为 {limit}")
        return limit
    return config.levels


@dataclass
class _BandOutcome:
    key: BandKey
    coefficient_vote: np.ndarray
    texture_vote: np.ndarray
    flatness: np.ndarray


class ForegroundDetector:
    """
    TGWV 检测器，持有全部逐帧状态

    帧必须按时间顺序送入；状态对象只能由一个调用方使用。
    """

    def __init__(self, config: DetectorConfig, background: Optional[BackgroundProvider] = None):
        self.config = config
        self.background = background
        self.frame_count = 0
        self.shape: Optional[Tuple[int, int]] = None
        self.levels: int = config.levels
        self.translation: Dict[int, float] = {}
        self.states: Dict[Tuple[BandKey, str], BandDecisionState] = {}
        self._reference_cache: Optional[Tuple[GrayFrame, WaveletPyramid, Dict[BandKey, np.ndarray]]] = None
        self.reference_rebuilds = 0

    def _initialize(self, shape: Tuple[int, int]) -> None:
        height, width = shape
        self.shape = (height, width)
        self.levels = effective_levels(self.config, height, width)
        self.translation = translation_table(self.levels, self.config.ar_coefficient)
        if self.background is None:
            self.background = GmmBackgroundModel.from_config(self.config, height, width)
        for level in range(1, self.levels + 1):
            for name in BAND_NAMES:
                for channel in CHANNELS:
                    self.states[((level, name), channel)] = BandDecisionState(
                        self.shape, self.config.decision_variance_floor
                    )
        logger.info(
            f"检测器初始化: {width}x{height}, M={self.levels}, "
            f"ω_c={[round(v, 4) for v in self.translation.values()]}"
        )

    def save_checkpoint(self, path: Union[str, Path]) -> Path:
        """
        保存检测器的全部逐帧状态，长序列可分段续跑

        包括背景模型（GMM 分量或静态背景图）、每个频带两个通道的判决统计与已处理帧数。

        Args:
            path: .npz 文件路径

        Returns:
            实际写出的路径
        """
        if self.shape is None:
            raise CheckpointError("检测器尚未处理任何帧，没有可保存的状态")
        arrays: Dict[str, np.ndarray] = {
            "format_version": np.int64(DETECTOR_CHECKPOINT_VERSION),
            "frame_count": np.int64(self.frame_count),
            "shape": np.array(self.shape, dtype=np.int64),
            "levels": np.int64(self.levels),
        }
        if isinstance(self.background, GmmBackgroundModel):
            arrays["background_kind"] = np.array("gmm")
            arrays.update({f"background_{k}": v for k, v in self.background.to_arrays().items()})
        elif isinstance(self.background, StaticBackground):
            arrays["background_kind"] = np.array("static")
            arrays["background_image"] = self.background.background.data
        else:
            raise CheckpointError("该背景模型不支持检查点", type(self.background).__name__)
        for ((level, name), channel), state in self.states.items():
            prefix = f"state_{level}_{name}_{channel}"
            arrays[f"{prefix}_mean"] = state.mean
            arrays[f"{prefix}_variance"] = state.variance
            arrays[f"{prefix}_updates"] = state.updates

        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(target, **arrays)
        logger.info(f"检测器检查点已保存: {target}（已处理 {self.frame_count} 帧）")
        return target

    @classmethod
    def load_checkpoint(cls, config: DetectorConfig, path: Union[str, Path]) -> "ForegroundDetector":
        """
        由检查点恢复检测器，之后的帧接着原序列处理

        分解层数必须与 config 在该帧尺寸下的实际层数一致；
        GMM 的超参数取自检查点，其余判决参数取自 config。
        """
        source = Path(path)
        try:
            with np.load(source) as archive:
                arrays = {name: archive[name] for name in archive.files}
            version = int(arrays["format_version"])
            if version != DETECTOR_CHECKPOINT_VERSION:
                raise CheckpointError("检查点版本不支持", f"{source}: v{version}")
            height, width = (int(v) for v in arrays["shape"])
            levels = int(arrays["levels"])
            kind = str(arrays["background_kind"])
            if kind == "gmm":
                background: BackgroundProvider = GmmBackgroundModel.from_arrays({
                    k[len("background_"):]: v for k, v in arrays.items() if k.startswith("background_")
                })
            elif kind == "static":
                background = StaticBackground(GrayFrame(arrays["background_image"]))
            else:
                raise CheckpointError("未知的背景模型类型", f"{source}: {kind}")

            detector = cls(config, background)
            if effective_levels(config, height, width) != levels:
                raise CheckpointError(
                    "检查点的分解层数与配置不符", f"{source}: 检查点 M={levels}, 配置 levels={config.levels}"
                )
            detector._initialize((height, width))
            for ((level, name), channel), state in detector.states.items():
                prefix = f"state_{level}_{name}_{channel}"
                state.mean = np.asarray(arrays[f"{prefix}_mean"], dtype=np.float64)
                state.variance = np.asarray(arrays[f"{prefix}_variance"], dtype=np.float64)
                state.updates = np.asarray(arrays[f"{prefix}_updates"], dtype=np.int64)
                if state.mean.shape != (height, width):
                    raise CheckpointError("判决统计尺寸与检查点帧尺寸不符", f"{source}: {prefix}")
            detector.frame_count = int(arrays["frame_count"])
        except CheckpointError:
            raise
        except (OSError, KeyError, ValueError, TgwvError) as e:
            raise CheckpointError("无法读取检测器检查点", f"{source}: {e}") from e

        logger.info(f"检测器检查点已加载: {source}（{width}x{height}, M={levels}, 已处理 {detector.frame_count} 帧）")
        return detector

    @property
    def in_burn_in(self) -> bool:
        return self.frame_count < self.config.burnin_frames

    def _reference(self, background: GrayFrame) -> Tuple[WaveletPyramid, Dict[BandKey, np.ndarray]]:
        """背景图与上一帧相同时复用其分解与 LBP 编码"""
        if self._reference_cache is not None:
            cached, pyramid, codes = self._reference_cache
            if np.array_equal(cached.data, background.data):
                return pyramid, codes
        pyramid = decompose(background, self.levels)
        codes = {key: lbp_codes(plane) for key, plane in pyramid.items()}
        self._reference_cache = (background, pyramid, codes)
        self.reference_rebuilds += 1
        return pyramid, codes

    def _process_band(self, key: BandKey, cur_plane: np.ndarray, bg_plane: np.ndarray,
                      bg_codes: np.ndarray, burn_in: bool) -> _BandOutcome:
        radius = self.config.lbp_window_radius
        cur_codes = lbp_codes(cur_plane)

        diff_w = coefficient_difference(cur_plane, bg_plane)
        diff_l = texture_difference_from_codes(cur_codes, bg_codes, radius)

        k, rate = self.config.decision_k, self.config.learning_rate
        vote_w = self.states[(key, "W")].vote(diff_w, k, rate, force_background=burn_in)
        vote_l = self.states[(key, "L")].vote(diff_l, k, rate, force_background=burn_in)
        return _BandOutcome(key, vote_w, vote_l, flatness_fraction(bg_codes, cur_codes, radius))

    def _band_outcomes(self, current: WaveletPyramid, background: WaveletPyramid,
                       bg_codes: Dict[BandKey, np.ndarray], burn_in: bool) -> List[_BandOutcome]:
        keys = list(current.keys())
        tasks = [(key, current.band(*key), background.band(*key), bg_codes[key], burn_in) for key in keys]
        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                return list(pool.map(lambda args: self._process_band(*args), tasks))
        return [self._process_band(*args) for args in tasks]

    def _weights(self, current: WaveletPyramid, outcomes: List[_BandOutcome]) -> Tuple[WeightSet, float]:
        if self.config.noise_sigma == "auto":
            sigma_noise = estimate_noise_sigma(current)
        else:
            sigma_noise = float(self.config.noise_sigma)

        weights = WeightSet(translation=dict(self.translation))
        for key, plane in current.items():
            weights.noise[key] = noise_weight(band_sigma(plane), sigma_noise)

        flatness = {outcome.key: outcome.flatness for outcome in outcomes}
        for level in range(1, self.levels + 1):
            texture_w, texture_l = texture_weights({name: flatness[(level, name)] for name in BAND_NAMES})
            for name in BAND_NAMES:
                weights.coefficient[(level, name)] = texture_w[name]
                weights.texture[(level, name)] = texture_l[name]
        return weights, sigma_noise

    def process_frame(self, frame: GrayFrame) -> FrameResult:
        """
        处理一帧

        Args:
            frame: 当前帧，尺寸在整个序列中保持不变

        Returns:
            FrameResult（预热期掩码全为背景）
        """
        if self.shape is None:
            self._initialize(frame.shape)
        elif frame.shape != self.shape:
            raise DimensionError("序列中帧尺寸发生变化", f"帧 {self.frame_count}: {frame.shape} vs {self.shape}")

        burn_in = self.in_burn_in
        background = self.background.update_and_extract(frame)

        current = decompose(frame, self.levels)
        reference, reference_codes = self._reference(background)
        outcomes = self._band_outcomes(current, reference, reference_codes, burn_in)

        weights, sigma_noise = self._weights(current, outcomes)
        votes = VotePlanes(
            coefficient={o.key: o.coefficient_vote for o in outcomes},
            texture={o.key: o.texture_vote for o in outcomes},
        )
        vote_map = accumulate(votes, weights)
        if burn_in:
            mask = BinaryMask.empty(*self.shape)
        else:
            mask = postprocess(threshold(vote_map, self.config.vote_fraction), self.config.postprocess_median)

        result = FrameResult(self.frame_count, mask, vote_map, burn_in, sigma_noise)
        logger.debug(
            f"帧 {self.frame_count}: σ_n={sigma_noise:.5f}, 前景像素={result.foreground_count}, "
            f"平均票率={float(vote_map.ratio().mean()):.4f}"
        )
        self.frame_count += 1
        if self.frame_count == self.config.burnin_frames:
            logger.info(f"预热结束（{self.frame_count} 帧）")
        return result


class IntensityGmmDetector:
    """仅基于强度的 GMM 基线检测器，与 TGWV 共享预热约定"""

    def __init__(self, config: DetectorConfig):
        self.config = config
        self.model: Optional[GmmBackgroundModel] = None
        self.frame_count = 0

    def process_frame(self, frame: GrayFrame) -> FrameResult:
        if self.model is None:
            self.model = GmmBackgroundModel.from_config(self.config, frame.height, frame.width)
        burn_in = self.frame_count < self.config.burnin_frames
        raw = self.model.foreground_mask(frame)
        mask = BinaryMask.empty(*frame.shape) if burn_in else postprocess(raw, self.config.postprocess_median)
        self.model.update_and_extract(frame)

        hits = mask.data.astype(np.float64)
        result = FrameResult(self.frame_count, mask, VoteMap(hits, np.ones(frame.shape)), burn_in)
        self.frame_count += 1
        return result


def build_detector(config: DetectorConfig, method: str = "tgwv", background: str = "gmm",
                   static_frames: Sequence[GrayFrame] = ()) -> Detector:
    """
    按名称构建检测器

    Args:
        config: 检测器配置
        method: "tgwv" 或 "gmm"（强度基线）
        background: "gmm" 或 "static"（仅 tgwv 使用）
        static_frames: 静态中值背景所用的帧

    Returns:
        检测器实例
    """
    if method == "gmm":
        return IntensityGmmDetector(config)
    if method != "tgwv":
        raise ValueError(f"未知检测方法: {method}")
    if background == "static":
        return ForegroundDetector(config, StaticBackground.from_frames(list(static_frames)))
    if background != "gmm":
        raise ValueError(f"未知背景模型: {background}")
    return ForegroundDetector(config)


def run_frames(detector: Detector, frames: Sequence[GrayFrame]) -> List[FrameResult]:
    """在内存中的帧序列上运行检测器"""
    return [detector.process_frame(frame) for frame in frames]


def _load_indexed(path: Path, index: int) -> GrayFrame:
    try:
        return load_frame(path)
    except TgwvError as e:
        raise FrameLoadError(e.message, f"帧 {index} ({path}): {e.details}") from e


def process_sequence(config: DetectorConfig, frame_paths: Sequence[Union[str, Path]],
                     output_dir: Union[str, Path], background: str = "gmm", method: str = "tgwv",
                     dump_votes: bool = False, show_progress: bool = False,
                     resume: Optional[Union[str, Path]] = None,
                     checkpoint: Optional[Union[str, Path]] = None) -> pd.DataFrame:
    """
    处理磁盘上的帧序列，写出掩码与摘要

    掩码与输入帧同名（扩展名改为 .pgm），写为 0/255 的 PGM。

    Args:
        config: 检测器配置
        frame_paths: 有序帧文件路径
        output_dir: 输出目录
        background: "gmm" 或 "static"
        method: "tgwv" 或 "gmm"
        dump_votes: 是否额外导出 V/V_max 图到 votes/ 子目录
        show_progress: 是否显示进度条
        resume: 从该检测器检查点接着处理（frame_paths 为后续帧）
        checkpoint: 处理完最后一帧后把检测器状态写到该路径

    Returns:
        每帧统计表
    """
    paths = [Path(p) for p in frame_paths]
    if not paths:
        raise EmptyInputError("没有输入帧")
    check = FrameValidator.validate_frame_paths(paths)
    for warning in check["warnings"]:
        logger.warning(warning)
    if not check["is_valid"]:
        raise FrameLoadError("帧序列无效", "; ".join(check["errors"]))

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    if (resume is not None or checkpoint is not None) and method != "tgwv":
        raise CheckpointError("只有 tgwv 检测器支持检查点", f"method={method}")
    detector: Detector
    if resume is not None:
        detector = ForegroundDetector.load_checkpoint(config, resume)
    else:
        static: List[GrayFrame] = []
        if method == "tgwv" and background == "static":
            static = [_load_indexed(p, i) for i, p in enumerate(paths[:config.static_frames])]
        detector = build_detector(config, method, background, static)

    logger.info(f"开始处理 {len(paths)} 帧（method={method}, background={background}）→ {out}")
    records = []
    for index, path in enumerate(tqdm(paths, desc="detect", disable=not show_progress)):
        frame = _load_indexed(path, index)
        result = detector.process_frame(frame)
        name = f"{path.stem}.pgm"
        try:
            save_frame(result.mask, out / name)
            if dump_votes:
                result.vote_map.save(out / "votes" / name)
        except TgwvError as e:
            e.details = f"帧 {index}: {e.details}"
            raise
        ratio = result.vote_map.ratio()
        records.append({
            "frame": name,
            "burn_in": result.burn_in,
            "foreground_pixels": result.foreground_count,
            "foreground_ratio": result.foreground_count / ratio.size,
            "mean_vote_ratio": float(ratio.mean()),
            "max_vote_ratio": float(ratio.max()),
        })

    if checkpoint is not None and isinstance(detector, ForegroundDetector):
        detector.save_checkpoint(checkpoint)

    summary = pd.DataFrame.from_records(records)
    (out / "summary.txt").write_text(summary.to_string(index=False) + "\n", encoding="utf-8")
    (out / "summary.json").write_text(json_dumps({
        "method": method,
        "background": background,
        "frames": len(paths),
        "total_foreground_pixels": summary["foreground_pixels"].sum(),
        "config": config.model_dump(),
    }, indent=2), encoding="utf-8")
    logger.info(f"处理完成: {len(paths)} 帧，前景像素总数 {int(summary['foreground_pixels'].sum())}")
    return summary

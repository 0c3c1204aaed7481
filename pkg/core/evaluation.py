"""
掩码评测：Recall、Precision、F-Measure 与 PSNR

序列汇总采用 micro 平均（先累加混淆计数再求比值）。
PSNR 取 {0,1} 掩码的均方误差形式 10·log10(n / Σ(f−g)^2)。
"""
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config.logger import logger
from utils.image_io import ImageHandler
from utils.validators import FrameValidator
from .exceptions import DimensionError, EmptyInputError, FrameLoadError
from .frames import BinaryMask, load_frame

CSV_COLUMNS = ["frame", "tp", "fp", "fn", "tn", "recall", "precision", "f", "psnr"]
TABLE_COLUMNS = ["Method", "Recall", "Precision", "F-Measure", "PSNR"]

REPORT_HEADER = "# 汇总指标为 micro 平均（累加 TP/FP/FN/TN 后计算）；PSNR 为有限值帧的平均，无穷帧单独计数"


def _ratio(numerator: int, denominator: int, empty_value: float) -> float:
    return numerator / denominator if denominator > 0 else empty_value


def _f_measure(precision: float, recall: float) -> float:
    total = precision + recall
    return 2.0 * precision * recall / total if total > 0 else 0.0


def _psnr(errors: int, pixels: int) -> float:
    return math.inf if errors == 0 else 10.0 * math.log10(pixels / errors)


@dataclass(frozen=True)
class FrameReport:
    """单帧混淆计数及派生指标"""

    tp: int
    fp: int
    fn: int
    tn: int
    name: str = ""

    @property
    def pixels(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn, 1.0)

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp, 1.0)

    @property
    def f_measure(self) -> float:
        return _f_measure(self.precision, self.recall)

    @property
    def psnr(self) -> float:
        return _psnr(self.fp + self.fn, self.pixels)

    def row(self) -> dict:
        return {
            "frame": self.name, "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
            "recall": self.recall, "precision": self.precision, "f": self.f_measure, "psnr": self.psnr,
        }


@dataclass(frozen=True)
class SequenceReport:
    """序列汇总"""

    tp: int
    fp: int
    fn: int
    tn: int
    frames: int
    psnr: float
    infinite_psnr_frames: int

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn, 1.0)

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp, 1.0)

    @property
    def f_measure(self) -> float:
        return _f_measure(self.precision, self.recall)

    def row(self) -> dict:
        return {
            "frame": "aggregate", "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
            "recall": self.recall, "precision": self.precision, "f": self.f_measure, "psnr": self.psnr,
        }

    def to_dict(self) -> dict:
        data = asdict(self)
        data.update(recall=self.recall, precision=self.precision, f_measure=self.f_measure)
        return data


def score(mask: BinaryMask, truth: BinaryMask, name: str = "") -> FrameReport:
    """
    单帧评分

    约定：真值为空时 recall=1；掩码为空时 precision=1；P+R=0 时 F=0；两者相同时 PSNR=+∞。

    Args:
        mask: 检测掩码
        truth: 真值掩码
        name: 帧名

    Returns:
        FrameReport
    """
    if mask.shape != truth.shape:
        raise DimensionError("掩码与真值尺寸不匹配", f"{mask.shape} vs {truth.shape}")
    m, g = mask.data, truth.data
    tp = int(np.count_nonzero(m & g))
    fp = int(np.count_nonzero(m & ~g))
    fn = int(np.count_nonzero(~m & g))
    tn = int(m.size - tp - fp - fn)
    return FrameReport(tp, fp, fn, tn, name)


def aggregate(reports: Sequence[FrameReport]) -> SequenceReport:
    """由累加计数得到序列指标"""
    if not reports:
        raise EmptyInputError("没有可汇总的帧")
    finite = [r.psnr for r in reports if math.isfinite(r.psnr)]
    return SequenceReport(
        tp=sum(r.tp for r in reports),
        fp=sum(r.fp for r in reports),
        fn=sum(r.fn for r in reports),
        tn=sum(r.tn for r in reports),
        frames=len(reports),
        psnr=float(np.mean(finite)) if finite else math.inf,
        infinite_psnr_frames=len(reports) - len(finite),
    )


def score_sequence(masks: Sequence[BinaryMask], truths: Sequence[BinaryMask]) -> List[FrameReport]:
    """逐帧评分内存中的掩码序列"""
    if len(masks) != len(truths):
        raise DimensionError("掩码与真值帧数不一致", f"{len(masks)} vs {len(truths)}")
    return [score(m, t, f"{i:06d}") for i, (m, t) in enumerate(zip(masks, truths), start=1)]


def _load_mask(path: Path) -> BinaryMask:
    return BinaryMask(load_frame(path).data > 0.5)


def score_directories(mask_dir: Union[str, Path], truth_dir: Union[str, Path]) -> List[FrameReport]:
    """
    按文件名配对两个目录中的掩码并评分

    Args:
        mask_dir: 检测掩码目录
        truth_dir: 真值目录

    Returns:
        按文件名排序的 FrameReport 列表
    """
    check = FrameValidator.validate_pairing(ImageHandler.list_frames(mask_dir), ImageHandler.list_frames(truth_dir))
    if not check["is_valid"]:
        raise FrameLoadError("掩码与真值无法配对", "; ".join(check["errors"]))
    reports = [score(_load_mask(m), _load_mask(t), m.stem) for m, t in check["pairs"]]
    logger.info(f"已评测 {len(reports)} 帧: {mask_dir} vs {truth_dir}")
    return reports


def reports_to_frame(reports: Sequence[FrameReport], summary: SequenceReport) -> pd.DataFrame:
    """逐帧结果 + 最后一行汇总"""
    rows = [r.row() for r in reports] + [summary.row()]
    return pd.DataFrame.from_records(rows, columns=CSV_COLUMNS)


def format_table(rows: Sequence[Tuple[str, float, float, float, float]]) -> str:
    """
    按方法对比表的格式输出（三位小数）

    Args:
        rows: (方法名, recall, precision, f_measure, psnr)

    Returns:
        对齐的文本表格
    """
    table = pd.DataFrame.from_records(list(rows), columns=TABLE_COLUMNS)
    return table.to_string(index=False, float_format=lambda v: f"{v:.3f}")


def format_report(summary: SequenceReport, method: str = "Detector") -> str:
    """带 micro 平均说明的单方法报告"""
    lines = [
        REPORT_HEADER,
        format_table([(method, summary.recall, summary.precision, summary.f_measure, summary.psnr)]),
        f"frames={summary.frames}  infinite_psnr_frames={summary.infinite_psnr_frames}",
    ]
    return "\n".join(lines)

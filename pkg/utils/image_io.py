from pathlib import Path
from typing import List, Union

import cv2
import numpy as np

from config.settings import settings
from core.exceptions import FrameLoadError, FrameSaveError

FRAME_SUFFIXES = (".pgm", ".png")

# Rec.601 亮度权重，按 cv2 的 BGR 通道顺序
LUMA_BGR = np.array([0.114, 0.587, 0.299])


class ImageHandler:
    """
    帧文件处理工具
    负责读取、写入、枚举 PGM/PNG 帧文件
    """

    @staticmethod
    def read_gray(file_path: Union[str, Path]) -> np.ndarray:
        """
        读取 8 位 PGM/PNG 并转换为 [0,1] 浮点灰度

        Args:
            file_path: 帧文件路径

        Returns:
            二维 float64 数组
        """
        path = Path(file_path)
        if not path.is_file():
            raise FrameLoadError("帧文件不存在", str(path))

        pixels = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        if pixels is None:
            raise FrameLoadError("无法解码帧文件", str(path))
        if pixels.dtype != np.uint8:
            raise FrameLoadError("不支持的位深", f"{path}: {pixels.dtype}")

        if pixels.ndim == 3:
            # 丢弃 alpha 通道后转亮度
            bgr = pixels[:, :, :3].astype(np.float64)
            return np.clip(bgr @ LUMA_BGR / 255.0, 0.0, 1.0)
        return pixels.astype(np.float64) / 255.0

    @staticmethod
    def write_uint8(pixels: np.ndarray, output_path: Union[str, Path]) -> Path:
        """
        写入 8 位单通道图像，格式由扩展名决定

        Args:
            pixels: uint8 二维数组
            output_path: 输出路径（.pgm 或 .png）

        Returns:
            写入的路径
        """
        path = Path(output_path)
        if path.suffix.lower() not in FRAME_SUFFIXES:
            raise FrameSaveError("不支持的输出格式", str(path))
        path.parent.mkdir(parents=True, exist_ok=True)
        try:
            ok = cv2.imwrite(str(path), np.ascontiguousarray(pixels, dtype=np.uint8))
        except cv2.error as e:
            raise FrameSaveError("写入帧文件失败", f"{path}: {e}") from e
        if not ok:
            raise FrameSaveError("写入帧文件失败", str(path))
        return path

    @staticmethod
    def list_frames(directory: Union[str, Path]) -> List[Path]:
        """按文件名排序列出目录下的帧文件"""
        root = Path(directory)
        if not root.is_dir():
            raise FrameLoadError("帧目录不存在", str(root))
        return sorted(p for p in root.iterdir() if p.suffix.lower() in FRAME_SUFFIXES)

    @staticmethod
    def frame_name(index: int, suffix: str = ".pgm") -> str:
        """生成零填充编号的帧文件名，如 frame_000001.pgm"""
        return f"{settings.MASK_PREFIX}{index:0{settings.INDEX_DIGITS}d}{suffix}"

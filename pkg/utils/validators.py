from pathlib import Path
from typing import Any, Dict, List, Sequence

from .image_io import FRAME_SUFFIXES


def _result() -> Dict[str, Any]:
    return {
        'is_valid': True,
        'errors': [],
        'warnings': []
    }


class FrameValidator:
    """
    帧序列验证工具
    负责检查帧文件列表、掩码与真值的配对
    """

    @staticmethod
    def validate_frame_paths(paths: Sequence[Path]) -> Dict[str, Any]:
        """
        验证帧文件列表

        Args:
            paths: 帧文件路径列表

        Returns:
            验证结果字典
        """
        result = _result()

        if not paths:
            result['is_valid'] = False
            result['errors'].append('帧列表为空')
            return result

        missing = [str(p) for p in paths if not Path(p).is_file()]
        if missing:
            result['is_valid'] = False
            result['errors'].append(f'以下帧文件不存在: {", ".join(missing[:5])}')

        unsupported = [str(p) for p in paths if Path(p).suffix.lower() not in FRAME_SUFFIXES]
        if unsupported:
            result['is_valid'] = False
            result['errors'].append(f'不支持的帧格式: {", ".join(unsupported[:5])}')

        suffixes = {Path(p).suffix.lower() for p in paths}
        if len(suffixes) > 1:
            result['warnings'].append(f'帧文件扩展名不一致: {", ".join(sorted(suffixes))}')

        stems = [Path(p).stem for p in paths]
        if len(set(stems)) != len(stems):
            result['is_valid'] = False
            result['errors'].append('存在同名帧，输出掩码会相互覆盖')

        return result

    @staticmethod
    def validate_pairing(mask_paths: Sequence[Path], truth_paths: Sequence[Path]) -> Dict[str, Any]:
        """
        验证掩码与真值按文件名一一对应

        Args:
            mask_paths: 掩码文件列表
            truth_paths: 真值文件列表

        Returns:
            验证结果字典，附带 pairs: [(mask, truth), ...]
        """
        result = _result()
        result['pairs'] = []

        masks = {Path(p).stem: Path(p) for p in mask_paths}
        truths = {Path(p).stem: Path(p) for p in truth_paths}

        if not masks:
            result['is_valid'] = False
            result['errors'].append('掩码目录为空')
        if not truths:
            result['is_valid'] = False
            result['errors'].append('真值目录为空')

        only_masks: List[str] = sorted(set(masks) - set(truths))
        only_truths: List[str] = sorted(set(truths) - set(masks))
        if only_masks:
            result['is_valid'] = False
            result['errors'].append(f'以下掩码缺少真值: {", ".join(only_masks[:5])}')
        if only_truths:
            result['is_valid'] = False
            result['errors'].append(f'以下真值缺少掩码: {", ".join(only_truths[:5])}')

        if result['is_valid']:
            result['pairs'] = [(masks[stem], truths[stem]) for stem in sorted(masks)]
        return result

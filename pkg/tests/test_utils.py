import pytest
import numpy as np
from pathlib import Path
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from utils.json_helper import json_dumps, json_loads
from utils.validators import FrameValidator


class TestFrameValidator:
    """帧序列验证测试"""

    @pytest.fixture
    def frames(self, tmp_path):
        paths = []
        for name in ("frame_000001.pgm", "frame_000002.pgm"):
            path = tmp_path / name
            path.write_bytes(b"P5\n1 1\n255\n\x00")
            paths.append(path)
        return paths

    def test_valid(self, frames):
        result = FrameValidator.validate_frame_paths(frames)
        assert result['is_valid'] is True
        assert result['errors'] == []

    def test_empty(self):
        result = FrameValidator.validate_frame_paths([])
        assert result['is_valid'] is False

    def test_missing_and_unsupported(self, frames, tmp_path):
        result = FrameValidator.validate_frame_paths(frames + [tmp_path / "absent.pgm", tmp_path / "x.bmp"])
        assert result['is_valid'] is False
        assert len(result['errors']) == 2

    def test_mixed_suffix_warning(self, frames, tmp_path):
        png = tmp_path / "frame_000003.png"
        png.write_bytes(b"")
        result = FrameValidator.validate_frame_paths(frames + [png])
        assert result['is_valid'] is True
        assert result['warnings']

    def test_duplicate_stems(self, frames, tmp_path):
        png = tmp_path / "frame_000001.png"
        png.write_bytes(b"")
        result = FrameValidator.validate_frame_paths(frames + [png])
        assert result['is_valid'] is False

    def test_pairing(self, tmp_path):
        masks = [tmp_path / "m" / "a.pgm", tmp_path / "m" / "b.pgm"]
        truths = [tmp_path / "t" / "b.pgm", tmp_path / "t" / "a.pgm"]
        result = FrameValidator.validate_pairing(masks, truths)
        assert result['is_valid'] is True
        assert [(m.name, t.parent.name) for m, t in result['pairs']] == [("a.pgm", "t"), ("b.pgm", "t")]

    def test_pairing_missing(self, tmp_path):
        result = FrameValidator.validate_pairing([tmp_path / "a.pgm"], [tmp_path / "b.pgm"])
        assert result['is_valid'] is False
        assert result['pairs'] == []
        assert len(result['errors']) == 2


class TestJsonHelper:
    """JSON 工具测试"""

    def test_numpy_values(self):
        data = {
            "count": np.int64(3),
            "ratio": np.float32(0.5),
            "flag": np.bool_(True),
            "plane": np.array([[1, 2]]),
            "path": Path("a/b"),
            "psnr": np.float32(np.inf),
        }
        decoded = json_loads(json_dumps(data))
        assert decoded == {
            "count": 3, "ratio": 0.5, "flag": True, "plane": [[1, 2]], "path": "a/b", "psnr": "inf",
        }

    def test_non_ascii(self):
        assert "帧" in json_dumps({"name": "帧"})

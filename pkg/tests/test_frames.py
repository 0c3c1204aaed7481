import pytest
import numpy as np
import cv2
from pathlib import Path
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.exceptions import DimensionError, FrameLoadError, FrameSaveError, FrameValueError, TgwvError
from core.frames import BinaryMask, GrayFrame, WaveletPyramid, load_frame, save_frame
from utils.image_io import ImageHandler


PGM_2x2 = b"P5\n2 2\n255\n" + bytes([0, 64, 128, 255])


class TestGrayFrame:
    """GrayFrame / BinaryMask 容器测试"""

    def test_from_flat(self):
        """测试按行展开构造"""
        frame = GrayFrame.from_flat(3, 2, [0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
        assert frame.width == 3
        assert frame.height == 2
        assert frame.data[1, 0] == pytest.approx(0.3)

    def test_from_flat_length_mismatch(self):
        with pytest.raises(DimensionError):
            GrayFrame.from_flat(3, 2, [0.0] * 5)

    def test_rejects_bad_shapes(self):
        """测试非二维或空数组"""
        with pytest.raises(DimensionError):
            GrayFrame(np.zeros(4))
        with pytest.raises(DimensionError):
            GrayFrame(np.zeros((0, 3)))

    def test_rejects_out_of_range(self):
        """测试越界与非有限值抛出库异常，同时仍是 ValueError"""
        with pytest.raises(FrameValueError) as exc:
            GrayFrame(np.array([[0.5, 1.5]]))
        assert isinstance(exc.value, TgwvError)
        assert isinstance(exc.value, ValueError)
        assert "1.5" in exc.value.details
        with pytest.raises(FrameValueError):
            GrayFrame(np.array([[np.nan, 0.5]]))
        with pytest.raises(FrameValueError):
            GrayFrame(np.array([[-0.01, 0.5]]))

    def test_readonly_copy(self):
        """测试构造后只读且与输入解耦"""
        source = np.full((2, 2), 0.25)
        frame = GrayFrame(source)
        source[0, 0] = 0.9
        assert frame.data[0, 0] == 0.25
        with pytest.raises(ValueError):
            frame.data[0, 0] = 0.5

    def test_uint8_round_trip(self):
        pixels = np.arange(256, dtype=np.uint8).reshape(16, 16)
        assert np.array_equal(GrayFrame.from_uint8(pixels).to_uint8(), pixels)

    def test_mask_basics(self):
        mask = BinaryMask(np.array([[1, 0], [0, 1]]))
        assert mask.foreground_count == 2
        assert mask.to_uint8().tolist() == [[255, 0], [0, 255]]
        assert BinaryMask.empty(3, 4).shape == (3, 4)
        assert BinaryMask.empty(3, 4).foreground_count == 0


class TestWaveletPyramid:
    """WaveletPyramid 校验测试"""

    @staticmethod
    def _bands(levels, shape=(4, 4)):
        return {
            level: {name: np.zeros(shape) for name in ("LL", "LH", "HL", "HH")}
            for level in range(1, levels + 1)
        }

    def test_valid(self):
        pyramid = WaveletPyramid(2, self._bands(2))
        assert pyramid.shape == (4, 4)
        assert list(pyramid.keys())[:4] == [(1, "LL"), (1, "LH"), (1, "HL"), (1, "HH")]
        assert len(list(pyramid.items())) == 8

    def test_missing_band(self):
        bands = self._bands(1)
        del bands[1]["HH"]
        with pytest.raises(DimensionError):
            WaveletPyramid(1, bands)

    def test_inconsistent_shapes(self):
        bands = self._bands(2)
        bands[2]["LH"] = np.zeros((4, 5))
        with pytest.raises(DimensionError):
            WaveletPyramid(2, bands)

    def test_band_is_readonly(self):
        pyramid = WaveletPyramid(1, self._bands(1))
        with pytest.raises(ValueError):
            pyramid.band(1, "LL")[0, 0] = 1.0


class TestFrameIO:
    """帧文件读写测试"""

    def test_load_pgm_bytes(self, tmp_path):
        """测试读取手写的 P5 文件"""
        path = tmp_path / "tiny.pgm"
        path.write_bytes(PGM_2x2)
        frame = load_frame(path)
        assert frame.shape == (2, 2)
        assert np.allclose(frame.data, np.array([[0, 64], [128, 255]]) / 255.0)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "broken.pgm"
        path.write_bytes(b"P5\n2")
        with pytest.raises(FrameLoadError):
            load_frame(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FrameLoadError):
            load_frame(tmp_path / "nope.pgm")

    @pytest.mark.parametrize("suffix", [".pgm", ".png"])
    def test_save_load_round_trip(self, tmp_path, suffix):
        """测试 8 位数据的写入再读取不变"""
        pixels = np.random.default_rng(3).integers(0, 256, (12, 9), dtype=np.uint8)
        frame = GrayFrame.from_uint8(pixels)
        path = save_frame(frame, tmp_path / f"f{suffix}")
        assert np.array_equal(load_frame(path).to_uint8(), pixels)

    def test_mask_written_as_0_255(self, tmp_path):
        mask = BinaryMask(np.array([[True, False], [False, True]]))
        path = save_frame(mask, tmp_path / "mask.pgm")
        raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        assert raw.tolist() == [[255, 0], [0, 255]]

    def test_unsupported_output_suffix(self, tmp_path):
        with pytest.raises(FrameSaveError):
            save_frame(GrayFrame(np.zeros((2, 2))), tmp_path / "frame.jpg")

    def test_color_converted_to_luma(self, tmp_path):
        """测试彩色 PNG 按亮度权重转灰度"""
        bgr = np.zeros((2, 2, 3), dtype=np.uint8)
        bgr[:, :, 2] = 255
        path = tmp_path / "red.png"
        cv2.imwrite(str(path), bgr)
        frame = load_frame(path)
        assert np.allclose(frame.data, 0.299)

    def test_list_frames_sorted(self, tmp_path):
        for name in ("frame_000002.pgm", "frame_000001.pgm", "notes.txt"):
            (tmp_path / name).write_bytes(PGM_2x2)
        frames = ImageHandler.list_frames(tmp_path)
        assert [p.name for p in frames] == ["frame_000001.pgm", "frame_000002.pgm"]

    def test_list_frames_missing_dir(self, tmp_path):
        with pytest.raises(FrameLoadError):
            ImageHandler.list_frames(tmp_path / "absent")

    def test_frame_name(self):
        assert ImageHandler.frame_name(1) == "frame_000001.pgm"
        assert ImageHandler.frame_name(42, ".png") == "frame_000042.png"

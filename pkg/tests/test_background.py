import pytest
import numpy as np
from pathlib import Path
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.background import (
    BackgroundProvider, GmmBackgroundModel, StaticBackground, static_background,
)
from core.exceptions import CheckpointError, DimensionError, EmptyInputError
from core.frames import GrayFrame


def constant(value: float, shape=(8, 8)) -> GrayFrame:
    return GrayFrame(np.full(shape, value))


class TestGmmBackgroundModel:
    """逐像素 GMM 背景模型测试"""

    @pytest.fixture
    def model(self):
        return GmmBackgroundModel(8, 8, learning_rate=0.05)

    def test_is_provider(self, model):
        assert isinstance(model, BackgroundProvider)

    def test_first_frame_initializes(self, model):
        """测试第一帧直接成为背景"""
        frame = GrayFrame(np.random.default_rng(0).random((8, 8)))
        background = model.update_and_extract(frame)
        assert np.array_equal(background.data, frame.data)

    def test_switches_to_new_value(self, model):
        """测试背景变化后新分量成为主分量"""
        model.update_and_extract(constant(0.2))
        for _ in range(10):
            background = model.update_and_extract(constant(0.6))
        assert np.allclose(background.data, 0.6)

    def test_noisy_convergence(self):
        """测试带噪声的静止背景收敛到真实均值"""
        rng = np.random.default_rng(42)
        model = GmmBackgroundModel(16, 16)
        for _ in range(200):
            frame = GrayFrame(np.clip(0.5 + rng.normal(0.0, 0.01, (16, 16)), 0.0, 1.0))
            background = model.update_and_extract(frame)
        assert abs(background.data.mean() - 0.5) < 0.005
        assert np.max(np.abs(background.data - 0.5)) < 0.01

    def test_impulse_not_absorbed(self, model):
        """测试单帧脉冲不改变背景"""
        for _ in range(50):
            model.update_and_extract(constant(0.5))
        spike = np.full((8, 8), 0.5)
        spike[3, 4] = 1.0
        background = model.update_and_extract(GrayFrame(spike))
        assert np.allclose(background.data, 0.5)
        background = model.update_and_extract(constant(0.5))
        assert np.allclose(background.data, 0.5)

    def test_impulse_at_default_rate(self):
        """测试默认学习率 0.005 下 200 帧中的单帧脉冲不进入背景"""
        model = GmmBackgroundModel(8, 8, learning_rate=0.005)
        spike = np.full((8, 8), 0.5)
        spike[3, 4] = 1.0
        for index in range(200):
            frame = GrayFrame(spike) if index == 120 else constant(0.5)
            background = model.update_and_extract(frame)
            assert np.allclose(background.data, 0.5)
        assert not model.foreground_mask(constant(0.5)).data.any()

    def test_full_learning_rate_tracks_frame(self):
        """测试学习率为 1 时背景等于当前帧"""
        model = GmmBackgroundModel(6, 6, learning_rate=1.0)
        rng = np.random.default_rng(1)
        for _ in range(5):
            frame = GrayFrame(rng.random((6, 6)))
            background = model.update_and_extract(frame)
            assert np.allclose(background.data, frame.data)

    def test_weights_sorted_and_normalized(self, model):
        rng = np.random.default_rng(4)
        for _ in range(20):
            model.update_and_extract(GrayFrame(rng.random((8, 8))))
        assert np.allclose(model.weights.sum(axis=2), 1.0)
        assert np.all(np.diff(model.weights, axis=2) <= 1e-12)
        assert np.all(model.variances >= model.variance_floor)
        assert np.all(model.variances <= model.variance_ceiling)

    def test_foreground_mask(self, model):
        """测试仅强度判决"""
        assert model.foreground_mask(constant(0.9)).foreground_count == 0
        for _ in range(30):
            model.update_and_extract(constant(0.5))
        patch = np.full((8, 8), 0.5)
        patch[2:4, 2:4] = 0.9
        mask = model.foreground_mask(GrayFrame(patch))
        assert mask.foreground_count == 4
        assert mask.data[2:4, 2:4].all()

    def test_dimension_mismatch(self, model):
        with pytest.raises(DimensionError):
            model.update_and_extract(constant(0.5, (4, 4)))

    def test_checkpoint_round_trip(self, model, tmp_path):
        """测试检查点保存后恢复出相同状态"""
        rng = np.random.default_rng(9)
        for _ in range(15):
            model.update_and_extract(GrayFrame(rng.random((8, 8))))
        path = model.save_checkpoint(tmp_path / "ckpt" / "bg.npz")
        restored = GmmBackgroundModel.load_checkpoint(path)

        assert restored.shape == model.shape
        assert restored.learning_rate == model.learning_rate
        assert np.array_equal(restored.counts, model.counts)
        assert np.array_equal(restored.means, model.means)

        frame = GrayFrame(rng.random((8, 8)))
        assert np.array_equal(
            restored.update_and_extract(frame).data,
            model.update_and_extract(frame).data,
        )

    def test_checkpoint_wrong_version(self, tmp_path):
        path = tmp_path / "old.npz"
        np.savez(path, format_version=np.int64(99), weights=np.zeros((2, 2, 1)))
        with pytest.raises(CheckpointError):
            GmmBackgroundModel.load_checkpoint(path)

    def test_checkpoint_missing(self, tmp_path):
        with pytest.raises(CheckpointError):
            GmmBackgroundModel.load_checkpoint(tmp_path / "absent.npz")

    def test_checkpoint_missing_field(self, tmp_path):
        path = tmp_path / "partial.npz"
        np.savez(path, format_version=np.int64(1))
        with pytest.raises(CheckpointError):
            GmmBackgroundModel.load_checkpoint(path)


class TestStaticBackground:
    """静态中值背景测试"""

    def test_median(self):
        frames = [constant(v) for v in (0.1, 0.9, 0.5)]
        assert np.allclose(static_background(frames).data, 0.5)

    def test_even_count_median(self):
        frames = [constant(v) for v in (0.2, 0.4)]
        assert np.allclose(static_background(frames).data, 0.3)

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            static_background([])

    def test_mismatched_frames(self):
        with pytest.raises(DimensionError):
            static_background([constant(0.1), constant(0.1, (4, 4))])

    def test_provider(self):
        provider = StaticBackground.from_frames([constant(0.3)])
        assert isinstance(provider, BackgroundProvider)
        assert np.allclose(provider.update_and_extract(constant(0.8)).data, 0.3)
        with pytest.raises(DimensionError):
            provider.update_and_extract(constant(0.8, (4, 4)))

import pytest
import numpy as np
from pathlib import Path
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.decisions import (
    BandDecisionState, VotePlanes, coefficient_difference, texture_difference, texture_difference_from_codes,
)
from core.exceptions import DimensionError
from core.lbp import ONES_BIN, ZEROS_BIN, build_field, histogram_field, lbp_codes


class TestDifferences:
    """系数差与纹理差测试"""

    def test_coefficient_difference(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=(6, 7)), rng.normal(size=(6, 7))
        assert np.array_equal(coefficient_difference(a, b), np.abs(a - b))
        assert np.allclose(coefficient_difference(b + 0.3, b), 0.3)
        assert np.all(coefficient_difference(a, a) == 0.0)

    def test_coefficient_shape_mismatch(self):
        with pytest.raises(DimensionError):
            coefficient_difference(np.zeros((3, 3)), np.zeros((3, 4)))

    def test_identical_fields(self):
        """测试相同直方图的纹理差严格为 0"""
        plane = np.random.default_rng(1).random((12, 12))
        lbp_field = build_field(plane, 3)
        assert np.all(texture_difference(lbp_field, lbp_field) == 0.0)

    def test_disjoint_fields(self):
        ones = histogram_field(np.full((6, 6), ONES_BIN, dtype=np.uint8), 1)
        zeros = histogram_field(np.full((6, 6), ZEROS_BIN, dtype=np.uint8), 1)
        assert np.allclose(texture_difference(ones, zeros), 1.0)

    def test_half_overlap(self):
        """测试窗口内一半 bin 不同时差为 0.5 附近"""
        codes = np.full((4, 4), ONES_BIN, dtype=np.uint8)
        codes[:, :2] = ZEROS_BIN
        mixed = histogram_field(codes, 1)
        uniform = histogram_field(np.full((4, 4), ONES_BIN, dtype=np.uint8), 1)
        diff = texture_difference(mixed, uniform)
        # 每个 3x3 周期窗口都恰好覆盖 3 列中的 1 或 2 列 ZEROS_BIN
        assert set(np.round(diff * 9).astype(int).ravel().tolist()) <= {3, 6}
        assert diff.min() >= 0.0
        assert diff.max() <= 1.0

    @pytest.mark.parametrize("radius", [1, 2, 5])
    def test_from_codes_matches_fields(self, radius):
        """测试由编码直接计算的纹理差与直方图场版本逐位相同"""
        rng = np.random.default_rng(radius)
        cur, bg = lbp_codes(rng.random((14, 10))), lbp_codes(rng.random((14, 10)))
        direct = texture_difference_from_codes(cur, bg, radius)
        expected = texture_difference(histogram_field(cur, radius), histogram_field(bg, radius))
        assert direct.dtype == np.float64
        assert np.array_equal(direct, expected)

    def test_from_codes_identical_and_disjoint(self):
        codes = np.full((6, 6), ONES_BIN, dtype=np.uint8)
        assert np.all(texture_difference_from_codes(codes, codes, 2) == 0.0)
        other = np.full((6, 6), ZEROS_BIN, dtype=np.uint8)
        assert np.all(texture_difference_from_codes(codes, other, 2) == 1.0)

    def test_window_mismatch(self):
        plane = np.random.default_rng(2).random((8, 8))
        with pytest.raises(DimensionError):
            texture_difference(build_field(plane, 1), build_field(plane, 2))


class TestBandDecisionState:
    """逐频带判决状态测试"""

    def test_cold_start_zero_diff(self):
        state = BandDecisionState((4, 4))
        votes = state.vote(np.zeros((4, 4)), k=2.5, learning_rate=0.01)
        assert not votes.any()

    def test_threshold_arithmetic(self):
        """测试 μ=0.1, s=0.02, k=2.5 时阈值为 0.15"""
        state = BandDecisionState((1, 2))
        state.mean[:] = 0.1
        state.variance[:] = 0.02 ** 2
        assert np.allclose(state.threshold(2.5), 0.15)
        votes = state.vote(np.array([[0.2, 0.12]]), k=2.5, learning_rate=0.01)
        assert votes.tolist() == [[True, False]]

    def test_selective_update(self):
        """测试前景票处统计不更新"""
        state = BandDecisionState((1, 2))
        state.vote(np.array([[0.1, 0.1]]), k=2.5, learning_rate=0.01, force_background=True)
        assert np.allclose(state.mean, 0.1)

        votes = state.vote(np.array([[0.1, 5.0]]), k=2.5, learning_rate=0.01)
        assert votes.tolist() == [[False, True]]
        assert state.mean[0, 1] == pytest.approx(0.1)
        assert state.updates.tolist() == [[2, 1]]

    def test_no_absorption(self):
        """测试长时间保持大差值的像素持续投前景票"""
        state = BandDecisionState((2, 2))
        for _ in range(10):
            state.vote(np.full((2, 2), 0.01), k=2.5, learning_rate=0.1, force_background=True)
        for _ in range(500):
            votes = state.vote(np.full((2, 2), 0.8), k=2.5, learning_rate=0.1)
            assert votes.all()

    def test_force_background(self):
        state = BandDecisionState((3, 3))
        votes = state.vote(np.full((3, 3), 100.0), k=2.5, learning_rate=0.01, force_background=True)
        assert not votes.any()
        assert np.all(state.updates == 1)

    def test_votes_monotone_in_diff(self):
        """测试增大差值不会把前景票变为背景票"""
        rng = np.random.default_rng(6)
        base = BandDecisionState((8, 8))
        for _ in range(20):
            base.vote(rng.normal(0.2, 0.02, (8, 8)), 2.5, 0.05, force_background=True)
        diff = rng.normal(0.2, 0.05, (8, 8))
        low = BandDecisionState((8, 8))
        high = BandDecisionState((8, 8))
        for state in (low, high):
            state.mean, state.variance, state.updates = base.mean.copy(), base.variance.copy(), base.updates.copy()
        votes_low = low.vote(diff, 2.5, 0.05)
        votes_high = high.vote(diff + np.abs(rng.normal(0.0, 0.1, (8, 8))), 2.5, 0.05)
        assert np.all(votes_high[votes_low])

    def test_stationary_false_vote_rate(self):
        """测试平稳差值序列的长期前景票率低于 2%"""
        rng = np.random.default_rng(2025)
        state = BandDecisionState((32, 32))
        for _ in range(30):
            state.vote(rng.normal(0.2, 0.02, (32, 32)), 2.5, 0.05, force_background=True)
        hits = 0
        for _ in range(300):
            hits += int(state.vote(rng.normal(0.2, 0.02, (32, 32)), 2.5, 0.05).sum())
        rate = hits / (300 * 32 * 32)
        assert rate < 0.02
        assert rate > 0.0

    def test_variance_floor(self):
        state = BandDecisionState((2, 2), variance_floor=1e-6)
        for _ in range(5):
            state.vote(np.zeros((2, 2)), 2.5, 0.5)
        assert np.all(state.variance >= 1e-6)

    def test_invalid_k(self):
        with pytest.raises(ValueError):
            BandDecisionState((2, 2)).vote(np.zeros((2, 2)), 0.0, 0.01)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            BandDecisionState((2, 2)).vote(np.zeros((3, 3)), 2.5, 0.01)


class TestVotePlanes:
    """票平面集合测试"""

    def test_check(self):
        planes = VotePlanes(
            coefficient={(1, "LL"): np.zeros((2, 2), dtype=bool)},
            texture={(1, "LL"): np.zeros((2, 2), dtype=bool)},
        )
        planes.check((2, 2))
        assert planes.keys() == [(1, "LL")]
        with pytest.raises(DimensionError):
            planes.check((3, 3))

    def test_mismatched_keys(self):
        planes = VotePlanes(
            coefficient={(1, "LL"): np.zeros((2, 2), dtype=bool)},
            texture={(1, "LH"): np.zeros((2, 2), dtype=bool)},
        )
        with pytest.raises(DimensionError):
            planes.check((2, 2))

"""Two-stage detection, the LRT threshold and the (S,S) refinement."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisemod.channel import RxFrame, apply_channel
from noisemod.detector import (
    SegmentStats,
    demodulate,
    lrt_threshold,
    segment_stats,
    silent_test,
    variance_test,
)
from noisemod.modem import LinkConfig, TernaryState, map_pair_to_bits, modulate

S, L, H = TernaryState.S, TernaryState.L, TernaryState.H


def _stats(mean=0.0, variance=0.0, margin=0.0):
    return SegmentStats(mean=complex(mean), variance=variance, activity_margin=margin)


class TestSegmentStats:
    def test_silence(self):
        cfg = LinkConfig(n=4, mu=1.0)
        stats = segment_stats(np.zeros(4, dtype=np.complex128), 1.0 + 0.0j, cfg)
        assert stats.mean == 0
        assert stats.variance == 0
        assert stats.activity_margin == pytest.approx(-1.0)

    def test_constant_segment_has_zero_variance(self):
        cfg = LinkConfig(n=5, mu=1.0)
        seg = np.full(5, 0.7 - 0.2j)
        assert segment_stats(seg, 1.0, cfg).variance == pytest.approx(0.0, abs=1e-15)

    def test_two_sample_hand_computation(self):
        # {0, 2}: mean 1, variance ((1)^2 + (1)^2)/2 = 1.
        cfg = LinkConfig(n=2, mu=1.0)
        stats = segment_stats(np.array([0.0 + 0j, 2.0 + 0j]), 1.0, cfg)
        assert stats.mean == pytest.approx(1.0)
        assert stats.variance == pytest.approx(1.0)

    def test_length_mismatch(self):
        cfg = LinkConfig(n=4)
        with pytest.raises(ValueError, match="length"):
            segment_stats(np.zeros(5, dtype=np.complex128), 1.0, cfg)


class TestSilentTest:
    def test_zero_mean_declares_silent(self):
        assert silent_test(_stats(margin=-1.0)) is True

    def test_active_mean_declares_active(self):
        assert silent_test(_stats(margin=1.0)) is False

    def test_tie_declares_active(self):
        # ybar = h*mu/2 sits exactly between the two hypotheses.
        cfg = LinkConfig(n=2, mu=1.0)
        stats = segment_stats(np.array([0.5 + 0j, 0.5 + 0j]), 1.0, cfg)
        assert stats.activity_margin == pytest.approx(0.0)
        assert silent_test(stats) is False


class TestLrtThreshold:
    def test_two_to_one_variances(self):
        # sigma_y0^2 = 1, sigma_y1^2 = 2 -> tau = 2 ln 2.
        cfg = LinkConfig(n=2, sigma_l2=0.5, alpha=3.0, delta_db=0.0)
        assert cfg.sigma_w2 == pytest.approx(0.5)
        assert lrt_threshold(1.0, cfg) == pytest.approx(2.0 * math.log(2.0), rel=1e-12)

    def test_e_to_one_variances(self):
        # sigma_y0^2 = 1, sigma_y1^2 = e -> tau = e/(e-1).
        e = math.e
        cfg = LinkConfig(n=2, sigma_l2=0.5, alpha=2.0 * e - 1.0, delta_db=0.0)
        assert lrt_threshold(1.0, cfg) == pytest.approx(e / (e - 1.0), rel=1e-12)

    def test_deep_fade_limit(self):
        cfg = LinkConfig(n=2, sigma_l2=1.0, alpha=10.0, delta_db=10.0)
        assert lrt_threshold(0.0, cfg) == cfg.sigma_w2
        for habs in (1e-9, 1e-7, 1e-5):
            assert lrt_threshold(habs, cfg) == pytest.approx(cfg.sigma_w2, rel=1e-8)

    def test_between_the_variances(self):
        cfg = LinkConfig(n=2, sigma_l2=1.0, alpha=10.0, delta_db=10.0)
        for habs in (0.01, 0.3, 1.0, 3.0):
            s0 = habs**2 * cfg.sigma_l2 + cfg.sigma_w2
            s1 = habs**2 * cfg.sigma_h2 + cfg.sigma_w2
            assert s0 < lrt_threshold(habs, cfg) < s1


class TestVarianceTest:
    def test_boundary_is_low(self):
        assert variance_test(_stats(variance=2.0), tau=2.0) is L

    def test_above_boundary_is_high(self):
        assert variance_test(_stats(variance=2.0 + 1e-12), tau=2.0) is H

    def test_mid_variance(self):
        # sigma_y0^2 = 1, sigma_y1^2 = 10 -> tau = 10 ln(10)/9 ~ 2.558 < 3.
        cfg = LinkConfig(n=2, sigma_l2=0.5, alpha=19.0, delta_db=0.0)
        tau = lrt_threshold(1.0, cfg)
        assert tau == pytest.approx(10.0 * math.log(10.0) / 9.0, rel=1e-12)
        assert variance_test(_stats(variance=3.0), tau) is H


class TestDemodulate:
    def test_noiseless_round_trip(self):
        cfg = LinkConfig(n=200, mu=1.0, sigma_l2=1.0, alpha=10.0, delta_db=float("inf"))
        rng = np.random.default_rng(20)
        for bits in [(0, 0, 1), (1, 0, 0), (0, 1, 0), (1, 1, 1)]:
            tx = modulate(bits, cfg, rng)
            rx = apply_channel(tx, 1.0 + 0.0j, cfg, rng)
            result = demodulate(rx, cfg)
            assert result.bits == bits
            assert result.states == tx.states

    def test_refinement_forces_exactly_one_active(self):
        cfg = LinkConfig(n=4, mu=1.0, delta_db=10.0)
        rx = RxFrame(samples=np.zeros(8, dtype=np.complex128), h=1.0 + 0.0j)
        result = demodulate(rx, cfg)
        assert result.refined is True
        states = (result.states.first, result.states.second)
        assert states.count(S) == 1
        # All-zero frame ties the margins; the tie forces block 1 active.
        assert result.states.second is S

    def test_larger_margin_wins_refinement(self):
        cfg = LinkConfig(n=2, mu=1.0, delta_db=0.0)
        h = 1.0 + 0.0j
        # Both segments look silent, second is closer to active (larger margin).
        samples = np.array([0.0, 0.0, 0.2, 0.2], dtype=np.complex128)
        result = demodulate(RxFrame(samples=samples, h=h), cfg)
        assert result.refined is True
        assert result.states.first is S
        assert result.states.second is not S

    def test_determinism(self):
        cfg = LinkConfig(n=16, delta_db=5.0)
        rng = np.random.default_rng(21)
        tx = modulate((0, 1, 0), cfg, rng)
        rx = apply_channel(tx, 0.5 + 0.5j, cfg, rng)
        first = demodulate(rx, cfg)
        second = demodulate(rx, cfg)
        assert first == second

    def test_length_mismatch(self):
        cfg = LinkConfig(n=8)
        with pytest.raises(ValueError, match="length"):
            demodulate(RxFrame(samples=np.zeros(10, dtype=np.complex128), h=1.0), cfg)

    def test_bits_match_states(self):
        cfg = LinkConfig(n=32, delta_db=0.0)
        rng = np.random.default_rng(22)
        for _ in range(50):
            tx = modulate(tuple(rng.integers(0, 2, 3)), cfg, rng)
            h = complex(rng.standard_normal(), rng.standard_normal()) * math.sqrt(0.5)
            rx = apply_channel(tx, h, cfg, rng)
            result = demodulate(rx, cfg)
            assert result.bits == map_pair_to_bits(result.states)

    @settings(max_examples=25, deadline=None)
    @given(
        scale=st.floats(min_value=0.01, max_value=100.0),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    def test_scale_covariance(self, scale, seed):
        # Scaling all variances by c, samples by sqrt(c) and mu by sqrt(c)
        # leaves every decision unchanged.
        rng = np.random.default_rng(seed)
        cfg = LinkConfig(n=8, mu=1.0, sigma_l2=1.0, alpha=10.0, delta_db=3.0)
        scaled = LinkConfig(
            n=8, mu=math.sqrt(scale), sigma_l2=scale, alpha=10.0, delta_db=3.0
        )
        tx = modulate(tuple(rng.integers(0, 2, 3)), cfg, rng)
        h = complex(rng.standard_normal(), rng.standard_normal()) * math.sqrt(0.5)
        rx = apply_channel(tx, h, cfg, rng)
        rx_scaled = RxFrame(samples=rx.samples * math.sqrt(scale), h=rx.h)
        assert demodulate(rx, cfg).states == demodulate(rx_scaled, scaled).states

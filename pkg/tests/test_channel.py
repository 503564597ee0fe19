"""Rayleigh fading and AWGN behaviour."""

import math

import numpy as np
import pytest

from noisemod.channel import apply_channel, draw_rayleigh
from noisemod.modem import LinkConfig, StatePair, TernaryState, TxFrame, modulate


@pytest.fixture(scope="module")
def rayleigh_draws():
    rng = np.random.default_rng(10)
    return np.array([draw_rayleigh(rng) for _ in range(1_000_000)])


class TestDrawRayleigh:
    def test_unit_mean_square(self, rayleigh_draws):
        power = np.abs(rayleigh_draws) ** 2
        assert 0.997 <= power.mean() <= 1.003

    def test_exponential_tail(self, rayleigh_draws):
        frac = np.mean(np.abs(rayleigh_draws) ** 2 > 1.0)
        assert abs(frac - math.exp(-1)) <= 0.002

    def test_uniform_phase(self, rayleigh_draws):
        resultant = np.abs(np.mean(np.exp(1j * np.angle(rayleigh_draws))))
        assert resultant < 0.005


class TestApplyChannel:
    def test_noiseless_silence(self):
        cfg = LinkConfig(n=16, delta_db=float("inf"))
        tx = TxFrame(
            samples=np.zeros(32, dtype=np.complex128),
            states=StatePair(TernaryState.S, TernaryState.L),
        )
        rx = apply_channel(tx, 0.3 - 0.8j, cfg, np.random.default_rng(0))
        assert np.all(rx.samples == 0)

    def test_identity_channel(self):
        cfg = LinkConfig(n=16, delta_db=float("inf"))
        tx = TxFrame(
            samples=np.ones(32, dtype=np.complex128),
            states=StatePair(TernaryState.L, TernaryState.L),
        )
        rx = apply_channel(tx, 1.0 + 0.0j, cfg, np.random.default_rng(0))
        np.testing.assert_array_equal(rx.samples, np.ones(32, dtype=np.complex128))

    def test_noise_power_on_silence(self):
        # sigma_w2 = 2 -> per-sample E|r|^2 = 2 on a silent frame.
        cfg = LinkConfig(n=500_000, sigma_l2=1.0, delta_db=10 * math.log10(0.5))
        assert cfg.sigma_w2 == pytest.approx(2.0)
        tx = TxFrame(
            samples=np.zeros(2 * cfg.n, dtype=np.complex128),
            states=StatePair(TernaryState.S, TernaryState.L),
        )
        rx = apply_channel(tx, 0.7 + 0.1j, cfg, np.random.default_rng(14))
        assert np.mean(np.abs(rx.samples) ** 2) == pytest.approx(2.0, abs=0.01)

    def test_sample_mean_distribution(self):
        # Conditioned on the state and h, the segment mean is complex Gaussian
        # with mean h*mu and total variance (|h|^2 sigma^2 + sigma_w2)/n.
        cfg = LinkConfig(n=64, mu=1.0, sigma_l2=1.0, alpha=10.0, delta_db=3.0)
        h = 0.8 - 0.6j
        rng = np.random.default_rng(15)
        means = []
        for _ in range(20_000):
            tx = modulate((0, 0, 0), cfg, rng)  # (L,L)
            rx = apply_channel(tx, h, cfg, rng)
            means.append(rx.samples[: cfg.n].mean())
        means = np.array(means)
        expected_var = (abs(h) ** 2 * cfg.sigma_l2 + cfg.sigma_w2) / cfg.n
        assert abs(means.mean() - h * cfg.mu) < 4 * math.sqrt(expected_var / len(means))
        total_var = np.mean(np.abs(means - means.mean()) ** 2)
        assert total_var == pytest.approx(expected_var, rel=0.05)
        # Circular: the pseudo-variance E[(ybar - h mu)^2] vanishes.
        pseudo = np.mean((means - h * cfg.mu) ** 2)
        assert abs(pseudo) < 0.05 * expected_var

    def test_quasi_static_h_recorded(self):
        cfg = LinkConfig(n=8)
        tx = modulate((1, 1, 1), cfg, np.random.default_rng(16))
        h = draw_rayleigh(np.random.default_rng(17))
        rx = apply_channel(tx, h, cfg, np.random.default_rng(18))
        assert rx.h == h
        assert rx.samples.shape == (16,)

"""Bit mapping and block synthesis."""

import numpy as np
import pytest

from noisemod.modem import (
    LinkConfig,
    StatePair,
    TernaryState,
    VALID_PAIRS,
    generate_block,
    map_bits_to_pair,
    map_pair_to_bits,
    modulate,
)

S, L, H = TernaryState.S, TernaryState.L, TernaryState.H

# The complete mapping table (frozen contract).
MAPPING = {
    (0, 0, 0): (L, L),
    (0, 0, 1): (L, S),
    (0, 1, 0): (L, H),
    (0, 1, 1): (S, L),
    (1, 0, 0): (S, H),
    (1, 0, 1): (H, L),
    (1, 1, 0): (H, S),
    (1, 1, 1): (H, H),
}


class TestMapping:
    @pytest.mark.parametrize("bits,expected", sorted(MAPPING.items()))
    def test_table(self, bits, expected):
        pair = map_bits_to_pair(bits)
        assert (pair.first, pair.second) == expected

    @pytest.mark.parametrize("bits", sorted(MAPPING))
    def test_round_trip(self, bits):
        assert map_pair_to_bits(map_bits_to_pair(bits)) == bits

    def test_all_pairs_distinct(self):
        assert len(set(VALID_PAIRS)) == 8

    def test_ss_not_constructible(self):
        with pytest.raises(ValueError, match=r"\(S,S\)"):
            StatePair(S, S)

    def test_bad_bits_rejected(self):
        with pytest.raises(ValueError):
            map_bits_to_pair((0, 1))
        with pytest.raises(ValueError):
            map_bits_to_pair((0, 1, 2))

    def test_at_most_one_silent_block(self):
        for pair in VALID_PAIRS:
            n_silent = (pair.first is S) + (pair.second is S)
            assert n_silent in (0, 1)


class TestLinkConfig:
    def test_derived_variances(self):
        cfg = LinkConfig(n=200, mu=1.0, sigma_l2=2.0, alpha=10.0, delta_db=10.0)
        assert cfg.sigma_h2 == 20.0
        assert cfg.sigma_w2 == pytest.approx(0.2)

    def test_noiseless_limit(self):
        cfg = LinkConfig(n=4, delta_db=float("inf"))
        assert cfg.sigma_w2 == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n=1),
            dict(n=200, alpha=1.0),
            dict(n=200, alpha=0.5),
            dict(n=200, sigma_l2=0.0),
            dict(n=200, mu=-0.1),
        ],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            LinkConfig(**kwargs)


class TestGenerateBlock:
    def test_silent_block_is_zero(self):
        cfg = LinkConfig(n=64)
        block = generate_block(S, cfg, np.random.default_rng(0))
        assert block.shape == (64,)
        assert np.all(block == 0)

    def test_low_state_moments(self):
        # Law-of-large-numbers bounds at ~5 sigma of the estimators.
        cfg = LinkConfig(n=100_000, mu=1.0, sigma_l2=1.0)
        block = generate_block(L, cfg, np.random.default_rng(1))
        mean = block.mean()
        var = np.mean(np.abs(block - mean) ** 2)
        assert abs(mean - 1.0) <= 0.02
        assert abs(var - 1.0) <= 0.03

    def test_high_state_variance(self):
        cfg = LinkConfig(n=100_000, mu=1.0, sigma_l2=1.0, alpha=10.0)
        block = generate_block(H, cfg, np.random.default_rng(2))
        var = np.mean(np.abs(block - block.mean()) ** 2)
        assert abs(var - 10.0) <= 0.3

    def test_circular_symmetry(self):
        # Real and imaginary parts carry half the variance each.
        cfg = LinkConfig(n=100_000, mu=1.0, sigma_l2=1.0)
        block = generate_block(L, cfg, np.random.default_rng(3))
        assert np.var(block.real) == pytest.approx(0.5, rel=0.05)
        assert np.var(block.imag) == pytest.approx(0.5, rel=0.05)


class TestModulate:
    def test_silent_positions(self):
        cfg = LinkConfig(n=32)
        rng = np.random.default_rng(4)
        frame = modulate((0, 0, 1), cfg, rng)  # (L,S)
        assert np.all(frame.samples[32:] == 0)
        assert np.any(frame.samples[:32] != 0)
        frame = modulate((1, 0, 0), cfg, rng)  # (S,H)
        assert np.all(frame.samples[:32] == 0)
        assert np.any(frame.samples[32:] != 0)

    def test_frame_length(self):
        cfg = LinkConfig(n=2)
        frame = modulate((1, 1, 1), cfg, np.random.default_rng(5))
        assert frame.samples.shape == (4,)

    @pytest.mark.parametrize("bits", sorted(MAPPING))
    def test_states_follow_mapping(self, bits):
        cfg = LinkConfig(n=8)
        frame = modulate(bits, cfg, np.random.default_rng(6))
        assert frame.states == map_bits_to_pair(bits)

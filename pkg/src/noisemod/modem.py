"""Ternary noise-state modulator.

Information is carried by the statistics of complex baseband noise blocks,
not by a deterministic waveform.  Each block of ``n`` samples is silent (S),
low-variance Gaussian (L) or high-variance Gaussian (H); two consecutive
blocks form one signaling pair, and the eight valid pairs (everything except
(S,S)) carry three bits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TernaryState",
    "StatePair",
    "LinkConfig",
    "TxFrame",
    "STATE_ORDER",
    "VALID_PAIRS",
    "map_bits_to_pair",
    "map_pair_to_bits",
    "generate_block",
    "modulate",
]


class TernaryState(enum.Enum):
    """State of one transmitted block."""

    S = "S"  # intentional silence
    L = "L"  # low-variance noise
    H = "H"  # high-variance noise

    def __str__(self) -> str:
        return self.value


# Canonical index order used by transition matrices and the fast simulator.
STATE_ORDER = (TernaryState.S, TernaryState.L, TernaryState.H)


@dataclass(frozen=True)
class StatePair:
    """States of the two blocks of one signaling pair.  (S,S) is illegal."""

    first: TernaryState
    second: TernaryState

    def __post_init__(self) -> None:
        if self.first is TernaryState.S and self.second is TernaryState.S:
            raise ValueError("(S,S) is not a valid signaling pair")

    def __str__(self) -> str:
        return f"({self.first},{self.second})"


_S, _L, _H = TernaryState.S, TernaryState.L, TernaryState.H

# Bit-triplet -> state-pair mapping.  Fixed (not configurable) so the
# Hamming-distance weighting in the analysis matches the simulator exactly.
_BITS_TO_PAIR = {
    (0, 0, 0): StatePair(_L, _L),
    (0, 0, 1): StatePair(_L, _S),
    (0, 1, 0): StatePair(_L, _H),
    (0, 1, 1): StatePair(_S, _L),
    (1, 0, 0): StatePair(_S, _H),
    (1, 0, 1): StatePair(_H, _L),
    (1, 1, 0): StatePair(_H, _S),
    (1, 1, 1): StatePair(_H, _H),
}
_PAIR_TO_BITS = {pair: bits for bits, pair in _BITS_TO_PAIR.items()}

VALID_PAIRS = tuple(_BITS_TO_PAIR.values())


@dataclass(frozen=True)
class LinkConfig:
    """Scalar parameters of one link configuration.

    delta_db is the signal-to-AWGN variance ratio sigma_l2/sigma_w2 in dB;
    ``math.inf`` is accepted as the noiseless limit.
    """

    n: int                  # samples per block
    mu: float = 1.0         # reference mean used for silent discrimination
    sigma_l2: float = 1.0   # low-state noise variance
    alpha: float = 10.0     # high/low variance ratio (> 1)
    delta_db: float = 10.0

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if not self.mu >= 0.0:
            raise ValueError(f"mu must be >= 0, got {self.mu!r}")
        if not self.sigma_l2 > 0.0:
            raise ValueError(f"sigma_l2 must be > 0, got {self.sigma_l2!r}")
        if not self.alpha > 1.0:
            raise ValueError(f"alpha must be > 1, got {self.alpha!r}")
        if math.isnan(self.delta_db):
            raise ValueError("delta_db must not be NaN")

    @property
    def sigma_h2(self) -> float:
        return self.alpha * self.sigma_l2

    @property
    def sigma_w2(self) -> float:
        if math.isinf(self.delta_db):
            return 0.0
        return self.sigma_l2 / 10.0 ** (self.delta_db / 10.0)

    def block_variance(self, state: TernaryState) -> float:
        """Noise variance of a block in the given state (0 for silence)."""
        if state is TernaryState.S:
            return 0.0
        return self.sigma_l2 if state is TernaryState.L else self.sigma_h2


@dataclass(frozen=True)
class TxFrame:
    """One transmitted signaling pair: 2n samples, block 1 then block 2."""

    samples: np.ndarray
    states: StatePair


def map_bits_to_pair(bits) -> StatePair:
    """Map a bit triplet to its state pair."""
    key = tuple(int(b) for b in bits)
    if key not in _BITS_TO_PAIR:
        raise ValueError(f"not a bit triplet: {bits!r}")
    return _BITS_TO_PAIR[key]


def map_pair_to_bits(pair: StatePair) -> tuple[int, int, int]:
    """Inverse of :func:`map_bits_to_pair`; rejects anything outside the 8 valid pairs."""
    try:
        return _PAIR_TO_BITS[pair]
    except KeyError:
        raise ValueError(f"not a valid signaling pair: {pair!r}") from None


def generate_block(state: TernaryState, cfg: LinkConfig, rng: np.random.Generator) -> np.ndarray:
    """Synthesize one block of ``cfg.n`` complex baseband samples.

    Active blocks are circularly-symmetric complex Gaussian with mean
    ``cfg.mu`` and total variance sigma_l2 (L) or sigma_h2 (H); silent
    blocks are exactly zero.
    """
    if state is TernaryState.S:
        return np.zeros(cfg.n, dtype=np.complex128)
    scale = math.sqrt(cfg.block_variance(state) / 2.0)
    noise = rng.standard_normal(cfg.n) + 1j * rng.standard_normal(cfg.n)
    return cfg.mu + scale * noise


def modulate(bits, cfg: LinkConfig, rng: np.random.Generator) -> TxFrame:
    """Map a bit triplet to a state pair and synthesize the 2n-sample frame."""
    pair = map_bits_to_pair(bits)
    samples = np.concatenate(
        [generate_block(pair.first, cfg, rng), generate_block(pair.second, cfg, rng)]
    )
    return TxFrame(samples=samples, states=pair)

"""Two-stage receiver for ternary noise-state signaling.

Stage 1 declares a segment silent when its sample mean is closer to zero
than to the reference mean h*mu.  Stage 2 classifies active segments as
low/high variance against the likelihood-ratio threshold.  A consistency
refinement converts the illegal (S,S) outcome into a valid pair by forcing
the more active-looking segment back into the variance test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import RxFrame
from .modem import LinkConfig, StatePair, TernaryState, map_pair_to_bits

__all__ = [
    "SegmentStats",
    "DetectionResult",
    "segment_stats",
    "silent_test",
    "lrt_threshold",
    "variance_test",
    "demodulate",
]


@dataclass(frozen=True)
class SegmentStats:
    """Sufficient statistics of one received segment."""

    mean: complex             # arithmetic average of the n samples
    variance: float           # (1/n) sum |y - mean|^2  (biased, divisor n)
    activity_margin: float    # |mean| - |mean - h*mu|; negative looks silent


@dataclass(frozen=True)
class DetectionResult:
    states: StatePair
    bits: tuple[int, int, int]
    refined: bool             # True when the (S,S) consistency rule fired


def segment_stats(segment: np.ndarray, h: complex, cfg: LinkConfig) -> SegmentStats:
    """Compute mean, empirical variance and the silent-test margin of a segment."""
    if segment.shape != (cfg.n,):
        raise ValueError(f"segment must have length n={cfg.n}, got shape {segment.shape}")
    mean = complex(segment.mean())
    variance = float(np.mean(np.abs(segment - mean) ** 2))
    margin = abs(mean) - abs(mean - h * cfg.mu)
    return SegmentStats(mean=mean, variance=variance, activity_margin=margin)


def silent_test(stats: SegmentStats) -> bool:
    """True when the segment should be declared silent.  Ties declare active."""
    return stats.activity_margin < 0.0


def lrt_threshold(h: complex, cfg: LinkConfig) -> float:
    """Variance decision threshold from the log-likelihood ratio test.

    Continuously extended to sigma_w2 at |h| = 0 so deep fades never divide
    by zero.
    """
    u = abs(h) ** 2
    s0 = u * cfg.sigma_l2 + cfg.sigma_w2
    s1 = u * cfg.sigma_h2 + cfg.sigma_w2
    spread = s1 - s0
    if spread <= 0.0 or s0 == 0.0:
        return s1
    return math.log1p(spread / s0) * s1 * s0 / spread


def variance_test(stats: SegmentStats, tau: float) -> TernaryState:
    """Classify an active segment: H iff variance strictly exceeds tau."""
    return TernaryState.H if stats.variance > tau else TernaryState.L


def demodulate(rx: RxFrame, cfg: LinkConfig) -> DetectionResult:
    """Run the two-stage detection with (S,S) refinement and map back to bits."""
    if rx.samples.shape != (2 * cfg.n,):
        raise ValueError(f"frame must have length 2n={2 * cfg.n}, got shape {rx.samples.shape}")
    segs = (
        segment_stats(rx.samples[: cfg.n], rx.h, cfg),
        segment_stats(rx.samples[cfg.n :], rx.h, cfg),
    )
    silent = [silent_test(s) for s in segs]
    refined = False
    if silent[0] and silent[1]:
        refined = True
        # Force the larger-margin (more active-looking) segment; tie -> block 1.
        if segs[1].activity_margin > segs[0].activity_margin:
            silent[1] = False
        else:
            silent[0] = False
    tau = lrt_threshold(rx.h, cfg)
    decided = tuple(
        TernaryState.S if sil else variance_test(seg, tau) for sil, seg in zip(silent, segs)
    )
    pair = StatePair(decided[0], decided[1])
    return DetectionResult(states=pair, bits=map_pair_to_bits(pair), refined=refined)

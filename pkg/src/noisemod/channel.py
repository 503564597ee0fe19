"""Quasi-static Rayleigh fading channel with complex AWGN.

The fading coefficient is constant over a whole two-block frame and known at
the receiver (perfect CSI).  Complex noise follows the circularly-symmetric
convention: a total variance sigma_w2 split equally between real and
imaginary parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modem import LinkConfig, TxFrame

__all__ = ["ChannelRealization", "RxFrame", "draw_rayleigh", "apply_channel"]

# One complex fading coefficient; E[|h|^2] = 1 when drawn.
ChannelRealization = complex


@dataclass(frozen=True)
class RxFrame:
    """2n received complex samples together with the coefficient that produced them."""

    samples: np.ndarray
    h: complex


def draw_rayleigh(rng: np.random.Generator) -> complex:
    """Draw h with independent zero-mean Gaussian parts of variance 1/2 each."""
    return complex(rng.standard_normal() * math.sqrt(0.5), rng.standard_normal() * math.sqrt(0.5))


def apply_channel(tx: TxFrame, h: complex, cfg: LinkConfig, rng: np.random.Generator) -> RxFrame:
    """Apply r = h*s + w with i.i.d. complex AWGN of total variance sigma_w2."""
    scale = math.sqrt(cfg.sigma_w2 / 2.0)
    size = tx.samples.shape[0]
    noise = scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
    return RxFrame(samples=h * tx.samples + noise, h=h)

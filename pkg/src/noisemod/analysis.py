"""Closed-form bit-error-probability chain for the ternary scheme.

Single-segment detection errors are composed Q-function terms; a 3x3
transition kernel combines the mean and variance stages; pair probabilities
are the outer product of two kernel rows with the illegal (S,S) mass
redistributed over valid outputs; the conditional BEP Hamming-weights every
confusion and the fading average integrates it against the exponential
density of |h|^2.

The empirical variance of an active segment is treated as Gaussian with
spread sigma^4/n, which tightens as n grows; the redistribution weights
assume the truly-active block wins the refinement comparison.  Both
modelling choices are validated against Monte Carlo in the test suite.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .detector import lrt_threshold
from .modem import (
    STATE_ORDER,
    VALID_PAIRS,
    LinkConfig,
    StatePair,
    TernaryState,
    map_pair_to_bits,
)
from .quadrature import integrate

__all__ = [
    "StageProbs",
    "TransitionKernel",
    "q_function",
    "stage_probs",
    "transition_kernel",
    "pair_distribution",
    "conditional_bep",
    "bep_from_stage_probs",
    "rayleigh_average",
    "average_bep",
]

_LOG = logging.getLogger(__name__)
_SQRT2 = math.sqrt(2.0)

# Truncation point of the fading integral: the integrand is bounded by
# P_b <= 1/2, so the discarded tail is below 0.5*exp(-23) < 1e-10.
U_MAX = 23.0

_STATE_INDEX = {state: i for i, state in enumerate(STATE_ORDER)}
_IDX_S = _STATE_INDEX[TernaryState.S]

# Pair index i corresponds to the bit triplet with integer value i.
_PAIR_INDEX = {pair: i for i, pair in enumerate(VALID_PAIRS)}
_TX1 = np.array([_STATE_INDEX[p.first] for p in VALID_PAIRS])
_TX2 = np.array([_STATE_INDEX[p.second] for p in VALID_PAIRS])


def _bits_value(pair: StatePair) -> int:
    b = map_pair_to_bits(pair)
    return (b[0] << 2) | (b[1] << 1) | b[2]


_PAIR_BITS = [_bits_value(pair) for pair in VALID_PAIRS]
_HAMMING = np.array(
    [[bin(x ^ y).count("1") for y in _PAIR_BITS] for x in _PAIR_BITS], dtype=float
)

_warned_mu_zero = False


def q_function(x: float) -> float:
    """Upper-tail probability of the standard normal."""
    return 0.5 * math.erfc(x / _SQRT2)


@dataclass(frozen=True)
class StageProbs:
    """Single-segment stage error probabilities at a fixed channel coefficient.

    p_sa: silent segment declared active        p_ls: L segment declared silent
    p_hs: H segment declared silent             p_lh: active L classified H
    p_hl: active H classified L                 p_sh: forced-active S classified H
    """

    p_sa: float
    p_ls: float
    p_hs: float
    p_lh: float
    p_hl: float
    p_sh: float

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a probability, got {value!r}")


@dataclass(frozen=True)
class TransitionKernel:
    """P[u][t] = Pr(detected state t | transmitted state u, h), rows/cols in STATE_ORDER."""

    matrix: np.ndarray

    def prob(self, tx: TernaryState, detected: TernaryState) -> float:
        return float(self.matrix[_STATE_INDEX[tx], _STATE_INDEX[detected]])

    def row(self, tx: TernaryState) -> np.ndarray:
        return self.matrix[_STATE_INDEX[tx]]


def stage_probs(h: complex, cfg: LinkConfig) -> StageProbs:
    """Evaluate the six stage error probabilities at the coefficient h."""
    global _warned_mu_zero
    if cfg.mu == 0.0 and not _warned_mu_zero:
        _LOG.warning("mu = 0 disables the mean stage: silent-test probabilities are 1/2")
        _warned_mu_zero = True

    habs = abs(h)
    u = habs * habs
    s0 = u * cfg.sigma_l2 + cfg.sigma_w2
    s1 = u * cfg.sigma_h2 + cfg.sigma_w2
    root_n = math.sqrt(cfg.n)
    m = habs * cfg.mu * root_n
    tau = lrt_threshold(h, cfg)

    if cfg.sigma_w2 == 0.0:
        # Noiseless limit: silence is unmistakable once anything is received.
        p_sa = 0.0 if m > 0.0 else 0.5
        p_sh = 0.0 if tau > 0.0 else 0.5
    else:
        p_sa = q_function(m / math.sqrt(2.0 * cfg.sigma_w2))
        p_sh = q_function((tau - cfg.sigma_w2) * root_n / cfg.sigma_w2)

    if s0 == 0.0:  # only possible with sigma_w2 = 0 and |h| = 0
        p_ls = p_hs = p_lh = 0.5
        p_hl = 0.5
    else:
        p_ls = q_function(m / math.sqrt(2.0 * s0))
        p_hs = q_function(m / math.sqrt(2.0 * s1))
        p_lh = q_function((tau - s0) * root_n / s0)
        p_hl = 1.0 - q_function((tau - s1) * root_n / s1)

    return StageProbs(p_sa=p_sa, p_ls=p_ls, p_hs=p_hs, p_lh=p_lh, p_hl=p_hl, p_sh=p_sh)


def transition_kernel(sp: StageProbs) -> TransitionKernel:
    """Compose the mean and variance stages into the 3x3 state-decision kernel."""
    k = np.empty((3, 3))
    s, l, h = (_STATE_INDEX[st] for st in STATE_ORDER)
    k[s, s] = 1.0 - sp.p_sa
    k[s, h] = sp.p_sa * sp.p_sh
    k[s, l] = sp.p_sa * (1.0 - sp.p_sh)
    k[l, s] = sp.p_ls
    k[l, h] = (1.0 - sp.p_ls) * sp.p_lh
    k[l, l] = (1.0 - sp.p_ls) * (1.0 - sp.p_lh)
    k[h, s] = sp.p_hs
    k[h, l] = (1.0 - sp.p_hs) * sp.p_hl
    k[h, h] = (1.0 - sp.p_hs) * (1.0 - sp.p_hl)
    return TransitionKernel(matrix=k)


def _forced_classification(state: TernaryState, sp: StageProbs) -> dict[TernaryState, float]:
    """L/H split of a block forced active by the refinement, given its true state."""
    if state is TernaryState.L:
        return {TernaryState.L: 1.0 - sp.p_lh, TernaryState.H: sp.p_lh}
    if state is TernaryState.H:
        return {TernaryState.H: 1.0 - sp.p_hl, TernaryState.L: sp.p_hl}
    raise ValueError("a truly-silent block is never forced active by the analysis model")


def _redistribution_weights(tx_pair: StatePair, sp: StageProbs) -> np.ndarray:
    """(S,S)-mass redistribution weights over the 8 valid pairs (sums to 1)."""
    weights = np.zeros(len(VALID_PAIRS))

    def add(first: TernaryState, second: TernaryState, w: float) -> None:
        weights[_PAIR_INDEX[StatePair(first, second)]] += w

    s1, s2 = tx_pair.first, tx_pair.second
    if s1 is TernaryState.S:
        for target, w in _forced_classification(s2, sp).items():
            add(TernaryState.S, target, w)
    elif s2 is TernaryState.S:
        for target, w in _forced_classification(s1, sp).items():
            add(target, TernaryState.S, w)
    else:
        # Two active blocks: either one is forced with probability 1/2.
        for target, w in _forced_classification(s1, sp).items():
            add(target, TernaryState.S, 0.5 * w)
        for target, w in _forced_classification(s2, sp).items():
            add(TernaryState.S, target, 0.5 * w)
    return weights


def _pair_matrix(sp: StageProbs) -> np.ndarray:
    """Final pair-decision matrix M[i, j] = Pr(pair j detected | pair i sent)."""
    k = transition_kernel(sp).matrix
    prelim = k[_TX1[:, None], _TX1[None, :]] * k[_TX2[:, None], _TX2[None, :]]
    pi_ss = k[_TX1, _IDX_S] * k[_TX2, _IDX_S]
    weights = np.stack([_redistribution_weights(pair, sp) for pair in VALID_PAIRS])
    return prelim + pi_ss[:, None] * weights


def pair_distribution(tx_pair: StatePair, h: complex, cfg: LinkConfig) -> dict[StatePair, float]:
    """Distribution of the detected pair given the transmitted pair and h.

    The illegal (S,S) outcome carries zero mass: its preliminary probability
    is redistributed according to the refinement rule.
    """
    sp = stage_probs(h, cfg)
    row = _pair_matrix(sp)[_PAIR_INDEX[tx_pair]]
    return {pair: float(row[j]) for j, pair in enumerate(VALID_PAIRS)}


def bep_from_stage_probs(sp: StageProbs) -> float:
    """Hamming-weighted bit error probability for given stage probabilities."""
    m = _pair_matrix(sp)
    return float((_HAMMING * m).sum() / 3.0 / len(VALID_PAIRS))


def conditional_bep(h: complex, cfg: LinkConfig) -> float:
    """Bit error probability conditioned on the channel coefficient h."""
    return bep_from_stage_probs(stage_probs(h, cfg))


def rayleigh_average(pb: Callable[[float], float], tol: float = 1e-10) -> float:
    """Average pb(|h|) over unit-mean-square Rayleigh fading.

    |h|^2 is exponential with unit rate; the integral is truncated at U_MAX
    and evaluated by adaptive quadrature to absolute tolerance ``tol``.
    """
    value, _ = integrate(lambda u: pb(math.sqrt(u)) * math.exp(-u), 0.0, U_MAX, tol=tol)
    return value


def average_bep(cfg: LinkConfig, tol: float = 1e-10) -> float:
    """Fading-averaged bit error probability of the ternary scheme."""
    return rayleigh_average(lambda habs: conditional_bep(habs, cfg), tol=tol)

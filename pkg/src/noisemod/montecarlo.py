"""Seeded end-to-end BER simulation.

Vectorized frame-batch kernels for the ternary scheme and the binary
(two-variance, one bit per block) baseline, energy-parity helpers, and the
sweep driver that produces one record per sweep point.  All randomness flows
through numpy Generators seeded from explicit integers, so every record is
reproducible from (spec, seed).
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import average_bep, conditional_bep
from .modem import STATE_ORDER, VALID_PAIRS, LinkConfig, TernaryState, map_pair_to_bits

__all__ = [
    "EnergyNorm",
    "BerRecord",
    "SweepSpec",
    "TernaryBatchResult",
    "ternary_avg_energy_per_pair",
    "scale_binary_variances",
    "wilson_halfwidth",
    "detect_frames",
    "simulate_ternary_frames",
    "simulate_binary_frames",
    "run_ternary_point",
    "run_binary_point",
    "run_sweep",
]

_STATE_CODE = {state: i for i, state in enumerate(STATE_ORDER)}  # S=0, L=1, H=2
_CODE_S = _STATE_CODE[TernaryState.S]

# Pair index i <-> bit triplet with integer value i (Table mapping).
_TX1 = np.array([_STATE_CODE[p.first] for p in VALID_PAIRS])
_TX2 = np.array([_STATE_CODE[p.second] for p in VALID_PAIRS])
_PAIR_BITS = [map_pair_to_bits(p) for p in VALID_PAIRS]
_HAMMING = np.array(
    [
        [sum(x != y for x, y in zip(a, b)) for b in _PAIR_BITS]
        for a in _PAIR_BITS
    ],
    dtype=np.int64,
)
_DET_INDEX = -np.ones((3, 3), dtype=np.int64)
for _i, _p in enumerate(VALID_PAIRS):
    _DET_INDEX[_STATE_CODE[_p.first], _STATE_CODE[_p.second]] = _i

_Z95 = 1.959963984540054


class EnergyNorm(enum.Enum):
    """How the binary baseline's variances relate to the ternary energy budget."""

    NONE = "none"
    EQUAL_PAIR_ENERGY = "equal-pair-energy"


@dataclass(frozen=True)
class BerRecord:
    """One sweep point: configuration snapshot plus analytic and simulated BER."""

    scheme: str               # "ternary" or "binary"
    n: int
    mu: float
    alpha: float
    delta_db: float
    analytic_bep: float | None
    simulated_ber: float
    bit_errors: int
    total_bits: int
    ci_halfwidth: float       # Wilson 95% half-width
    seed: int
    error: str = ""           # non-empty when the point failed


@dataclass(frozen=True)
class SweepSpec:
    """A one-axis parameter sweep at fixed trials per point."""

    base: LinkConfig
    axis: str                 # "delta_db", "n" or "mu"
    values: tuple
    trials: int
    seed: int
    baseline: bool = False
    norm: EnergyNorm = EnergyNorm.EQUAL_PAIR_ENERGY

    def __post_init__(self) -> None:
        if self.axis not in ("delta_db", "n", "mu"):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if len(self.values) == 0:
            raise ValueError("sweep values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.trials < 10_000:
            raise ValueError(f"trials must be >= 10000, got {self.trials}")

    def config_at(self, value) -> LinkConfig:
        if self.axis == "n":
            return dataclasses.replace(self.base, n=int(value))
        return dataclasses.replace(self.base, **{self.axis: float(value)})


def ternary_avg_energy_per_pair(cfg: LinkConfig) -> float:
    """Average transmit energy of one two-block pair over the 8 equally likely pairs.

    Each active block contributes n*(variance + mu^2); silent blocks are free.
    Closed form: (6n/8)*(sigma_l2 + sigma_h2 + 2 mu^2).
    """
    return 0.75 * cfg.n * (cfg.sigma_l2 + cfg.sigma_h2 + 2.0 * cfg.mu**2)


def scale_binary_variances(cfg: LinkConfig, norm: EnergyNorm) -> tuple[float, float]:
    """Binary-baseline block variances under the requested energy normalization.

    EQUAL_PAIR_ENERGY solves 2n*c*(sigma_l2+sigma_h2)/2 = ternary pair energy,
    giving c = (3/4)*(sigma_l2+sigma_h2+2 mu^2)/(sigma_l2+sigma_h2).
    """
    if norm is EnergyNorm.NONE:
        return cfg.sigma_l2, cfg.sigma_h2
    total = cfg.sigma_l2 + cfg.sigma_h2
    c = 0.75 * (total + 2.0 * cfg.mu**2) / total
    return c * cfg.sigma_l2, c * cfg.sigma_h2


def wilson_halfwidth(successes: int, trials: int, z: float = _Z95) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    return z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom


def _chunk_frames(n: int) -> int:
    # Bound working arrays to a few tens of MB regardless of block length.
    return max(256, (1 << 20) // n)


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)


def _thresholds(u: np.ndarray, sigma_l2: float, sigma_h2: float, sigma_w2: float) -> np.ndarray:
    """Vectorized LRT threshold with the |h| -> 0 continuous extension."""
    s0 = u * sigma_l2 + sigma_w2
    s1 = u * sigma_h2 + sigma_w2
    spread = s1 - s0
    safe = (spread > 0.0) & (s0 > 0.0)
    ratio = np.divide(spread, s0, out=np.zeros_like(s0), where=safe)
    tau = np.where(safe, np.log1p(ratio) * s1 * s0 / np.where(safe, spread, 1.0), s1)
    return tau


def _detect(y: np.ndarray, hv: np.ndarray, cfg: LinkConfig) -> tuple[np.ndarray, np.ndarray]:
    ybar = y.mean(axis=2)
    variance = np.mean(np.abs(y - ybar[..., None]) ** 2, axis=2)
    margin = np.abs(ybar) - np.abs(ybar - (hv * cfg.mu)[:, None])
    silent = margin < 0.0
    both = silent[:, 0] & silent[:, 1]
    # Refinement: force the larger-margin block active; tie forces block 1.
    force_second = both & (margin[:, 1] > margin[:, 0])
    force_first = both & ~force_second
    silent[force_first, 0] = False
    silent[force_second, 1] = False
    tau = _thresholds(np.abs(hv) ** 2, cfg.sigma_l2, cfg.sigma_h2, cfg.sigma_w2)
    active_state = np.where(variance > tau[:, None], _STATE_CODE[TernaryState.H],
                            _STATE_CODE[TernaryState.L])
    return np.where(silent, _CODE_S, active_state), both


def detect_frames(y: np.ndarray, hv: np.ndarray, cfg: LinkConfig) -> np.ndarray:
    """Vectorized two-stage detection of a batch of frames.

    y has shape (frames, 2, n), hv shape (frames,).  Returns integer state
    codes of shape (frames, 2) in STATE_ORDER coding.  Matches
    :func:`noisemod.detector.demodulate` decision for decision.
    """
    decided, _ = _detect(y, hv, cfg)
    return decided


@dataclass(frozen=True)
class TernaryBatchResult:
    bit_errors: int
    total_bits: int
    frames: int
    ss_outputs: int           # final (S,S) decisions; must be 0
    refinements: int          # frames where the consistency rule fired
    tx_energy: float          # accumulated sum |x|^2 over all frames


def simulate_ternary_frames(
    cfg: LinkConfig,
    frames: int,
    rng: np.random.Generator,
    h: complex | None = None,
) -> TernaryBatchResult:
    """Simulate end-to-end ternary frames; h=None draws Rayleigh fading per frame."""
    sigma = np.array([0.0, math.sqrt(cfg.sigma_l2), math.sqrt(cfg.sigma_h2)])
    noise_scale = math.sqrt(cfg.sigma_w2)
    chunk = _chunk_frames(cfg.n)
    bit_errors = 0
    ss_outputs = 0
    refinements = 0
    tx_energy = 0.0
    left = frames
    while left > 0:
        m = min(chunk, left)
        left -= m
        pair_idx = rng.integers(0, len(VALID_PAIRS), m)
        states = np.stack([_TX1[pair_idx], _TX2[pair_idx]], axis=1)  # (m, 2)
        if h is None:
            hv = _complex_normal(rng, m)
        else:
            hv = np.full(m, h, dtype=np.complex128)
        g = _complex_normal(rng, (m, 2, cfg.n))
        active = states != _CODE_S
        x = active[..., None] * cfg.mu + sigma[states][..., None] * g
        tx_energy += float(np.sum(np.abs(x) ** 2))
        y = hv[:, None, None] * x + noise_scale * _complex_normal(rng, (m, 2, cfg.n))
        decided, both_silent = _detect(y, hv, cfg)
        det_idx = _DET_INDEX[decided[:, 0], decided[:, 1]]
        ss_outputs += int(np.count_nonzero(det_idx < 0))
        refinements += int(np.count_nonzero(both_silent))
        bit_errors += int(_HAMMING[pair_idx, det_idx].sum())
    return TernaryBatchResult(
        bit_errors=bit_errors,
        total_bits=3 * frames,
        frames=frames,
        ss_outputs=ss_outputs,
        refinements=refinements,
        tx_energy=tx_energy,
    )


def simulate_binary_frames(
    cfg: LinkConfig,
    frames: int,
    rng: np.random.Generator,
    norm: EnergyNorm = EnergyNorm.EQUAL_PAIR_ENERGY,
    h: complex | None = None,
) -> tuple[int, int, float]:
    """Simulate the binary baseline: zero-mean blocks, variance-LRT detection only.

    One bit per block, two bits per frame.  Returns (bit_errors, total_bits,
    tx_energy).
    """
    var_l, var_h = scale_binary_variances(cfg, norm)
    sigma = np.array([math.sqrt(var_l), math.sqrt(var_h)])
    noise_scale = math.sqrt(cfg.sigma_w2)
    chunk = _chunk_frames(cfg.n)
    bit_errors = 0
    tx_energy = 0.0
    left = frames
    while left > 0:
        m = min(chunk, left)
        left -= m
        bits = rng.integers(0, 2, (m, 2))
        if h is None:
            hv = _complex_normal(rng, m)
        else:
            hv = np.full(m, h, dtype=np.complex128)
        x = sigma[bits][..., None] * _complex_normal(rng, (m, 2, cfg.n))
        tx_energy += float(np.sum(np.abs(x) ** 2))
        y = hv[:, None, None] * x + noise_scale * _complex_normal(rng, (m, 2, cfg.n))
        ybar = y.mean(axis=2)
        variance = np.mean(np.abs(y - ybar[..., None]) ** 2, axis=2)
        tau = _thresholds(np.abs(hv) ** 2, var_l, var_h, cfg.sigma_w2)
        decided = (variance > tau[:, None]).astype(np.int64)
        bit_errors += int(np.count_nonzero(decided != bits))
    return bit_errors, 2 * frames, tx_energy


def run_ternary_point(
    cfg: LinkConfig,
    trials: int,
    seed: int,
    h: complex | None = None,
) -> BerRecord:
    """Simulate one ternary sweep point and attach the analytic BEP.

    With h=None the analytic column is the fading average; with a fixed h it
    is the conditional BEP at that coefficient.
    """
    rng = np.random.default_rng(seed)
    result = simulate_ternary_frames(cfg, trials, rng, h=h)
    analytic = average_bep(cfg) if h is None else conditional_bep(h, cfg)
    return BerRecord(
        scheme="ternary",
        n=cfg.n,
        mu=cfg.mu,
        alpha=cfg.alpha,
        delta_db=cfg.delta_db,
        analytic_bep=analytic,
        simulated_ber=result.bit_errors / result.total_bits,
        bit_errors=result.bit_errors,
        total_bits=result.total_bits,
        ci_halfwidth=wilson_halfwidth(result.bit_errors, result.total_bits),
        seed=seed,
    )


def run_binary_point(
    cfg: LinkConfig,
    trials: int,
    seed: int,
    norm: EnergyNorm = EnergyNorm.EQUAL_PAIR_ENERGY,
    h: complex | None = None,
) -> BerRecord:
    """Simulate one binary-baseline sweep point (no analytic column)."""
    rng = np.random.default_rng(seed)
    bit_errors, total_bits, _ = simulate_binary_frames(cfg, trials, rng, norm=norm, h=h)
    return BerRecord(
        scheme="binary",
        n=cfg.n,
        mu=0.0,
        alpha=cfg.alpha,
        delta_db=cfg.delta_db,
        analytic_bep=None,
        simulated_ber=bit_errors / total_bits,
        bit_errors=bit_errors,
        total_bits=total_bits,
        ci_halfwidth=wilson_halfwidth(bit_errors, total_bits),
        seed=seed,
    )


def _point_seeds(seed: int, points: int) -> np.ndarray:
    # Two independent 63-bit seeds per point (ternary, binary).
    state = np.random.SeedSequence(seed).generate_state(2 * points, dtype=np.uint64)
    return (state >> np.uint64(1)).reshape(points, 2)


def _attempted_fields(spec: SweepSpec, value) -> tuple[int, float, float, float]:
    """(n, mu, alpha, delta_db) a point WOULD use, without validating them."""
    n, mu, alpha, delta = spec.base.n, spec.base.mu, spec.base.alpha, spec.base.delta_db
    if spec.axis == "n":
        n = int(value)
    elif spec.axis == "mu":
        mu = float(value)
    else:
        delta = float(value)
    return n, mu, alpha, delta


def run_sweep(
    spec: SweepSpec,
    progress: Callable[[str], None] | None = None,
) -> list[BerRecord]:
    """Run every point of the sweep; per-point failures become error records."""
    seeds = _point_seeds(spec.seed, len(spec.values))
    records: list[BerRecord] = []
    schemes = ("ternary", "binary") if spec.baseline else ("ternary",)
    for i, value in enumerate(spec.values):
        for j, scheme in enumerate(schemes):
            job_seed = int(seeds[i, j])
            if progress is not None:
                progress(f"{scheme} {spec.axis}={value}")
            try:
                cfg = spec.config_at(value)
                if scheme == "ternary":
                    records.append(run_ternary_point(cfg, spec.trials, job_seed))
                else:
                    records.append(run_binary_point(cfg, spec.trials, job_seed, norm=spec.norm))
            except Exception as exc:  # keep sweeping; report the failed point
                n, mu, alpha, delta = _attempted_fields(spec, value)
                records.append(
                    BerRecord(
                        scheme=scheme,
                        n=n,
                        mu=mu if scheme == "ternary" else 0.0,
                        alpha=alpha,
                        delta_db=delta,
                        analytic_bep=None,
                        simulated_ber=float("nan"),
                        bit_errors=0,
                        total_bits=0,
                        ci_halfwidth=0.0,
                        seed=job_seed,
                        error=f"{type(exc).__name__}: {exc}",
                    )
                )
    return records

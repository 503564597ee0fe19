"""Ternary noise-state modulation link simulator.

Transmitter, Rayleigh/AWGN channel and two-stage detector, together with the
closed-form bit-error-probability chain and a seeded Monte Carlo harness.
"""

__version__ = "0.1.0"

from .analysis import (
    StageProbs,
    TransitionKernel,
    average_bep,
    bep_from_stage_probs,
    conditional_bep,
    pair_distribution,
    q_function,
    rayleigh_average,
    stage_probs,
    transition_kernel,
)
from .channel import ChannelRealization, RxFrame, apply_channel, draw_rayleigh
from .detector import (
    DetectionResult,
    SegmentStats,
    demodulate,
    lrt_threshold,
    segment_stats,
    silent_test,
    variance_test,
)
from .modem import (
    STATE_ORDER,
    VALID_PAIRS,
    LinkConfig,
    StatePair,
    TernaryState,
    TxFrame,
    generate_block,
    map_bits_to_pair,
    map_pair_to_bits,
    modulate,
)
from .montecarlo import (
    BerRecord,
    EnergyNorm,
    SweepSpec,
    run_binary_point,
    run_sweep,
    run_ternary_point,
    scale_binary_variances,
    simulate_binary_frames,
    simulate_ternary_frames,
    ternary_avg_energy_per_pair,
    wilson_halfwidth,
)
from .quadrature import QuadratureError, integrate

__all__ = [
    "__version__",
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
    "ChannelRealization",
    "RxFrame",
    "draw_rayleigh",
    "apply_channel",
    "SegmentStats",
    "DetectionResult",
    "segment_stats",
    "silent_test",
    "lrt_threshold",
    "variance_test",
    "demodulate",
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
    "QuadratureError",
    "integrate",
    "EnergyNorm",
    "BerRecord",
    "SweepSpec",
    "ternary_avg_energy_per_pair",
    "scale_binary_variances",
    "wilson_halfwidth",
    "simulate_ternary_frames",
    "simulate_binary_frames",
    "run_ternary_point",
    "run_binary_point",
    "run_sweep",
]

"""Error-controlled adaptive quadrature.

Panel-bisection scheme with an embedded Gauss(7)/Kronrod(15) rule pair: the
Kronrod value is the estimate, |K15 - G7| the per-panel error.  The worst
panel is bisected until the summed error estimate meets the tolerance.
"""

from __future__ import annotations

import heapq
from typing import Callable

__all__ = ["QuadratureError", "integrate"]

# Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half; symmetric).
# Odd-index nodes are the embedded 7-point Gauss nodes.
_XGK = (
    0.9914553711208126,
    0.9491079123427585,
    0.8648644233597691,
    0.7415311855993944,
    0.5860872354676911,
    0.4058451513773972,
    0.2077849550078985,
    0.0,
)
_WGK = (
    0.02293532201052922,
    0.06309209262997855,
    0.1047900103222502,
    0.1406532597155259,
    0.1690047266392679,
    0.1903505780647854,
    0.2044329400752989,
    0.2094821410847278,
)
_WG = (
    0.1294849661688697,
    0.2797053914892767,
    0.3818300505051189,
    0.4179591836734694,
)


class QuadratureError(RuntimeError):
    """Raised when the requested tolerance cannot be reached."""

    def __init__(self, message: str, estimate: float, error_estimate: float):
        super().__init__(f"{message} (estimate={estimate!r}, error_estimate={error_estimate!r})")
        self.estimate = estimate
        self.error_estimate = error_estimate


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """Kronrod-15 estimate of the integral over [a, b] and |K15 - G7|."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fc = f(mid)
    kronrod = _WGK[7] * fc
    gauss = _WG[3] * fc
    for i in range(7):
        dx = half * _XGK[i]
        flo = f(mid - dx)
        fhi = f(mid + dx)
        kronrod += _WGK[i] * (flo + fhi)
        if i % 2 == 1:
            gauss += _WG[i // 2] * (flo + fhi)
    kronrod *= half
    gauss *= half
    return kronrod, abs(kronrod - gauss)


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    initial_panels: int = 32,
    max_splits: int = 4000,
) -> tuple[float, float]:
    """Integrate f over [a, b] to absolute tolerance ``tol``.

    Returns (value, error_estimate).  Raises :class:`QuadratureError` with
    the achieved error estimate when the panel budget runs out first.
    """
    if not b > a:
        raise ValueError(f"need b > a, got [{a!r}, {b!r}]")
    if initial_panels < 1:
        raise ValueError("initial_panels must be >= 1")

    # Heap of (-error, tie_breaker, a, b, value, error); worst panel first.
    panels = []
    counter = 0
    width = (b - a) / initial_panels
    for i in range(initial_panels):
        lo = a + i * width
        hi = b if i == initial_panels - 1 else a + (i + 1) * width
        val, err = _gk15(f, lo, hi)
        heapq.heappush(panels, (-err, counter, lo, hi, val, err))
        counter += 1

    splits = 0
    while True:
        total_err = sum(p[5] for p in panels)
        if total_err <= tol:
            break
        if splits >= max_splits:
            raise QuadratureError(
                f"tolerance {tol:g} not reached after {splits} bisections",
                estimate=sum(p[4] for p in panels),
                error_estimate=total_err,
            )
        _, _, lo, hi, _, _ = heapq.heappop(panels)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            raise QuadratureError(
                "panel too narrow to bisect further",
                estimate=sum(p[4] for p in panels),
                error_estimate=total_err,
            )
        for sub_lo, sub_hi in ((lo, mid), (mid, hi)):
            val, err = _gk15(f, sub_lo, sub_hi)
            heapq.heappush(panels, (-err, counter, sub_lo, sub_hi, val, err))
            counter += 1
        splits += 1

    # Sort by interval for a reproducible summation order.
    ordered = sorted(panels, key=lambda p: p[2])
    return sum(p[4] for p in ordered), sum(p[5] for p in ordered)

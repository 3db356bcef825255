"""Probability estimates with distribution-free confidence intervals."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass


def hoeffding_halfwidth(samples: int, confidence: float = 0.99) -> float:
    """Half-width ``t`` with ``P(|mean - p| >= t) <= 1 - confidence`` for
    the mean of ``samples`` i.i.d. variables in [0, 1]."""
    if samples < 1:
        raise ValueError("need at least one sample")
    delta = 1.0 - confidence
    return math.sqrt(math.log(2.0 / delta) / (2.0 * samples))


def dkw_interval_halfwidth(samples: int, confidence: float = 0.99) -> float:
    """Uniform half-width over all intervals at once.

    The DKW inequality bounds the CDF deviation by ``eps`` uniformly; the
    mass of any interval is a difference of two CDF values, hence ``2 eps``.
    Used for suprema over windows (Levy function, mode), where a per-window
    Hoeffding interval would not be valid.
    """
    delta = 1.0 - confidence
    return 2.0 * math.sqrt(math.log(2.0 / delta) / (2.0 * samples))


@dataclass(frozen=True)
class ProbEstimate:
    value: float
    ci_halfwidth: float = 0.0
    method: str = "exact"
    samples: int | None = None
    seed: int | None = None
    confidence: float | None = None

    @property
    def low(self) -> float:
        return max(0.0, self.value - self.ci_halfwidth)

    @property
    def high(self) -> float:
        return min(1.0, self.value + self.ci_halfwidth)

    def covers(self, x: float, slack: float = 0.0) -> bool:
        return abs(self.value - x) <= self.ci_halfwidth + slack

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

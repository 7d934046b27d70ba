"""The SPRT itself and the threshold schedules used by the achievability arguments."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .models import DistributionPair, Hypothesis, MomentSummary
from .special import normal_quantile

__all__ = [
    "Decision",
    "SprtConfig",
    "SprtOutcome",
    "run_sprt",
    "thresholds_probabilistic",
    "thresholds_expectation",
    "wald_error_bounds",
]


class Decision(enum.IntEnum):
    H0 = 0
    H1 = 1
    TRUNCATED = 2


@dataclass(frozen=True)
class SprtConfig:
    """Continue sampling while ``-alpha <= S_n <= beta``.

    ``alpha`` guards the H1 decision (lower boundary), ``beta`` the H0
    decision (upper boundary). ``max_steps`` is a safety cap.
    """

    alpha: float
    beta: float
    max_steps: int

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"SPRT thresholds must be positive, got alpha={self.alpha}, beta={self.beta}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    @classmethod
    def with_default_cap(cls, alpha: float, beta: float, ms: MomentSummary) -> "SprtConfig":
        """Cap at 50 times the larger Wald approximation of E[T], at least 1000."""
        horizon = max(beta / ms.D0, alpha / ms.D1, 1.0)
        return cls(alpha, beta, max(1000, int(math.ceil(50 * horizon))))


@dataclass(frozen=True)
class SprtOutcome:
    decision: Decision
    stop_time: int
    terminal_llr: float
    overshoot: float
    trace: tuple = ()


def run_sprt(
    pair: DistributionPair,
    hypothesis: Hypothesis,
    cfg: SprtConfig,
    rng: np.random.Generator,
    trace: bool = False,
) -> SprtOutcome:
    """Run one SPRT to its first exit from ``[-alpha, beta]``.

    Hitting a boundary exactly does not stop the test. With ``trace=True``
    the partial sums are kept in ``SprtOutcome.trace``.
    """
    s = 0.0
    path = []
    chunk = 64
    t = 0
    while True:
        for y in pair.draw_llr(hypothesis, rng, chunk):
            s += y
            t += 1
            if trace:
                path.append(s)
            if s > cfg.beta:
                return SprtOutcome(Decision.H0, t, s, s - cfg.beta, tuple(path))
            if s < -cfg.alpha:
                return SprtOutcome(Decision.H1, t, s, -s - cfg.alpha, tuple(path))
            if t >= cfg.max_steps:
                return SprtOutcome(Decision.TRUNCATED, t, s, 0.0, tuple(path))


def thresholds_probabilistic(ms: MomentSummary, n: int, eps: float, eta: float = 0.0) -> SprtConfig:
    """Thresholds that keep ``P_i(T > n)`` below ``eps`` for large ``n``.

    ``alpha = n*D1 + sqrt(n*V1) * Phi^-1(eps - eta)`` and likewise ``beta``
    with ``(D0, V0)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if not 0.0 <= eta < eps:
        raise ValueError(f"eta must lie in [0, eps), got {eta}")
    q = float(normal_quantile(eps - eta))
    c0 = -math.sqrt(ms.V1) * q
    c1 = -math.sqrt(ms.V0) * q
    rn = math.sqrt(n)
    alpha = n * (ms.D1 - c0 / rn)
    beta = n * (ms.D0 - c1 / rn)
    if alpha <= 0 or beta <= 0:
        raise ValueError(f"n={n} too small: thresholds ({alpha:.4g}, {beta:.4g}) are not positive")
    return SprtConfig(alpha, beta, 50 * n)


def thresholds_expectation(
    ms: MomentSummary,
    A: float,
    A_tilde: float,
    n: int,
    eta: float,
    direction: str = "achievability",
) -> SprtConfig:
    """Thresholds putting ``E_i[T]`` at ``n - eta`` (achievability) or ``n + eta`` (converse).

    ``alpha = n*D1 - A_tilde -/+ eta*D1``, ``beta = n*D0 - A -/+ eta*D0``.
    """
    if direction == "achievability":
        sign = -1.0
    elif direction == "converse":
        sign = 1.0
    else:
        raise ValueError(f"direction must be 'achievability' or 'converse', got {direction!r}")
    alpha = n * ms.D1 - A_tilde + sign * eta * ms.D1
    beta = n * ms.D0 - A + sign * eta * ms.D0
    if alpha <= 0 or beta <= 0:
        raise ValueError(f"n={n} too small: thresholds ({alpha:.4g}, {beta:.4g}) are not positive")
    return SprtConfig(alpha, beta, 50 * n)


def wald_error_bounds(cfg: SprtConfig) -> tuple[float, float]:
    """``(P_1|0 bound, P_0|1 bound) = (exp(-alpha), exp(-beta))``."""
    return math.exp(-cfg.alpha), math.exp(-cfg.beta)

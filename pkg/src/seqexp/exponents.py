"""First- and second-order error exponents at the corner of the achievable region.

Two regimes:

* probabilistic constraint ``max_i P_i(T > n) <= eps``: the weighted exponent
  backs off from ``lambda*D1 + (1-lambda)*D0`` by ``G(lambda, eps) / sqrt(n)``;
* expectation constraint ``max_i E_i[T] <= n``: the backoff is ``F(lambda) / n``.

Note the sign conventions differ: ``G`` is a correction added to the exponent,
``F`` is a correction to ``log P_error + n*D``. ``G`` weights the type-I term
(``lambda``) with ``sqrt(V(P1||P0))`` since that variance governs the lower
threshold, which is what bounds the type-I error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .models import MomentSummary
from .renewal import RenewalConstants
from .special import normal_quantile

__all__ = [
    "ExponentReport",
    "achievable_region_boundary",
    "first_order",
    "second_order_probabilistic",
    "second_order_expectation",
]

PER_SQRT_N = "per_sqrt_n"
PER_UNIT = "per_unit"


@dataclass(frozen=True)
class ExponentReport:
    constraint: str  # "probabilistic" or "expectation"
    lam: float
    first_order: float
    second_order: float
    normalization: str
    eps: Optional[float] = None

    def __post_init__(self):
        expected = {"probabilistic": PER_SQRT_N, "expectation": PER_UNIT}.get(self.constraint)
        if expected is None:
            raise ValueError(f"unknown constraint {self.constraint!r}")
        if self.normalization != expected:
            raise ValueError(f"{self.constraint} reports use {expected} normalization")

    def as_dict(self) -> dict:
        return {
            "constraint": self.constraint,
            "lambda": self.lam,
            "eps": self.eps,
            "first_order": self.first_order,
            "second_order": self.second_order,
            "normalization": self.normalization,
        }


def _check_lambda(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")


def achievable_region_boundary(ms: MomentSummary, E0: float) -> float:
    """Largest type-II exponent compatible with type-I exponent ``E0``."""
    if not E0 > 0:
        raise ValueError(f"E0 must be positive, got {E0}")
    return ms.D1 * ms.D0 / E0


def first_order(ms: MomentSummary, lam: float) -> float:
    _check_lambda(lam)
    return lam * ms.D1 + (1 - lam) * ms.D0


def second_order_probabilistic(ms: MomentSummary, lam: float, eps: float) -> ExponentReport:
    _check_lambda(lam)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    q = float(normal_quantile(eps))
    g = lam * math.sqrt(ms.V1) * q + (1 - lam) * math.sqrt(ms.V0) * q
    return ExponentReport("probabilistic", lam, first_order(ms, lam), g, PER_SQRT_N, eps)


def second_order_expectation(rc: RenewalConstants, lam: float, ms: Optional[MomentSummary] = None) -> ExponentReport:
    """``F(lambda) = lambda*(A~ + B~) + (1-lambda)*(A + B)``.

    ``ms`` is only used to fill in the first-order value (NaN without it).
    """
    _check_lambda(lam)
    f = lam * (rc.A_tilde + rc.B_tilde) + (1 - lam) * (rc.A + rc.B)
    fo = first_order(ms, lam) if ms is not None else math.nan
    return ExponentReport("expectation", lam, fo, f, PER_UNIT)

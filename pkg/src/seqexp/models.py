"""Hypothesis pairs (P0, P1) and their log-likelihood-ratio statistics.

Every pair exposes the LLR ``Y = log p0(X) / p1(X)`` for one observation:
draws under either hypothesis, the first two moments of ``Y``, and for the
two worked families the k-step functionals of ``S_k = Y_1 + ... + Y_k`` that
feed the renewal series.

Sign convention: under H0 the LLR has mean ``+D0 = D(P0||P1)``, under H1 it
has mean ``-D1 = -D(P1||P0)``.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .special import erlang_cdf_array, normal_cdf, normal_pdf

__all__ = [
    "Hypothesis",
    "MomentSummary",
    "KStepFunctionals",
    "DistributionPair",
    "GaussianPair",
    "ExponentialPair",
    "CustomPair",
    "UnsupportedPairError",
    "sample_llr",
    "moments",
    "k_step_functionals",
    "is_nonarithmetic",
    "pair_from_spec",
]


class Hypothesis(enum.IntEnum):
    H0 = 0
    H1 = 1


class UnsupportedPairError(TypeError):
    """Raised when an operation needs closed forms a pair does not provide."""


@dataclass(frozen=True)
class MomentSummary:
    """First moments of the LLR under both hypotheses (nats).

    ``E2_i = V_i + D_i**2`` is the raw second moment of the LLR under P_i,
    ``M3_i`` its third absolute moment.
    """

    D0: float
    D1: float
    V0: float
    V1: float
    M3_0: float
    M3_1: float
    E2_0: float
    E2_1: float

    def __post_init__(self):
        if not (0.0 < self.D0 < math.inf and 0.0 < self.D1 < math.inf):
            raise ValueError(f"divergences must be finite and positive, got D0={self.D0}, D1={self.D1}")
        if self.V0 < 0.0 or self.V1 < 0.0:
            raise ValueError("variances must be non-negative")

    @classmethod
    def from_dv(cls, D0, D1, V0, V1, M3_0=math.nan, M3_1=math.nan) -> "MomentSummary":
        return cls(D0, D1, V0, V1, M3_0, M3_1, V0 + D0 * D0, V1 + D1 * D1)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("D0", "D1", "V0", "V1", "M3_0", "M3_1", "E2_0", "E2_1")}


@dataclass(frozen=True)
class KStepFunctionals:
    """``P0(S_k<0) + P1(S_k>0)``, ``E_P0[S_k^-]`` and ``E_P1[S_k^+]``."""

    p_sign: np.ndarray
    neg_part_H0: np.ndarray
    pos_part_H1: np.ndarray


class DistributionPair:
    """Base class. Subclasses are immutable and safe to share across workers."""

    kind: str = "abstract"

    def moments(self) -> MomentSummary:
        raise NotImplementedError

    def draw_llr(self, hypothesis: Hypothesis, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` i.i.d. LLR increments under ``hypothesis``."""
        raise NotImplementedError

    def k_step(self, k) -> KStepFunctionals:
        raise UnsupportedPairError(f"{self.kind} pair has no closed-form k-step functionals")

    @property
    def nonarithmetic(self) -> bool:
        return True

    def spec(self) -> dict:
        raise NotImplementedError


def _affine_abs_third_moment_normal(mu: float, sigma: float) -> float:
    # E|X|^3 for X ~ N(mu, sigma^2)
    z = mu / sigma
    return float(
        (mu**3 + 3 * mu * sigma**2) * (1 - 2 * normal_cdf(-z)) + 2 * sigma * (mu**2 + 2 * sigma**2) * normal_pdf(z)
    )


@dataclass(frozen=True)
class GaussianPair(DistributionPair):
    """P_i = N(theta_i, 1)."""

    theta0: float
    theta1: float
    kind: str = field(default="gaussian", init=False)

    def __post_init__(self):
        if not (math.isfinite(self.theta0) and math.isfinite(self.theta1)):
            raise ValueError("means must be finite")
        if self.theta0 == self.theta1:
            raise ValueError("GaussianPair needs theta0 != theta1")

    @property
    def delta(self) -> float:
        return self.theta1 - self.theta0

    def _loc_scale(self, hypothesis: Hypothesis) -> tuple[float, float]:
        # Y = (t1^2 - t0^2)/2 + (t0 - t1) X,  X = theta_i + Z
        t0, t1 = self.theta0, self.theta1
        theta = t0 if hypothesis == Hypothesis.H0 else t1
        return 0.5 * (t1 * t1 - t0 * t0) + (t0 - t1) * theta, t0 - t1

    def draw_llr(self, hypothesis, rng, size):
        loc, scale = self._loc_scale(Hypothesis(hypothesis))
        z = rng.standard_normal(size)
        z *= scale
        z += loc
        return z

    def moments(self) -> MomentSummary:
        d2 = self.delta**2
        D = 0.5 * d2
        m3 = _affine_abs_third_moment_normal(D, abs(self.delta))
        return MomentSummary(D, D, d2, d2, m3, m3, d2 * d2 / 4 + d2, d2 * d2 / 4 + d2)

    def k_step(self, k) -> KStepFunctionals:
        k = np.asarray(k, dtype=float)
        d = abs(self.delta)
        mu = 0.5 * k * d * d
        sigma = np.sqrt(k) * d
        z = 0.5 * np.sqrt(k) * d
        tail = normal_cdf(-z)
        # E[W^-] = sigma*phi(mu/sigma) - mu*Phi(-mu/sigma) for W ~ N(mu, sigma^2)
        neg = sigma * normal_pdf(z) - mu * tail
        return KStepFunctionals(2.0 * tail, neg, neg.copy() if isinstance(neg, np.ndarray) else neg)

    def spec(self) -> dict:
        return {"kind": "gaussian", "theta0": self.theta0, "theta1": self.theta1}


@dataclass(frozen=True)
class ExponentialPair(DistributionPair):
    """P_i = Exp(rate gamma_i) with gamma0 < gamma1."""

    gamma0: float
    gamma1: float
    kind: str = field(default="exponential", init=False)

    def __post_init__(self):
        if not (0.0 < self.gamma0 < self.gamma1 < math.inf):
            raise ValueError(f"ExponentialPair needs 0 < gamma0 < gamma1, got {self.gamma0}, {self.gamma1}")

    def _loc_scale(self) -> tuple[float, float]:
        # Y = (g1 - g0) X + log(g0/g1)
        return math.log(self.gamma0 / self.gamma1), self.gamma1 - self.gamma0

    def draw_llr(self, hypothesis, rng, size):
        loc, slope = self._loc_scale()
        rate = self.gamma0 if Hypothesis(hypothesis) == Hypothesis.H0 else self.gamma1
        e = rng.standard_exponential(size)
        e *= slope / rate
        e += loc
        return e

    def _abs_third(self, rate: float) -> float:
        loc, slope = self._loc_scale()
        kink = -loc / slope
        f = lambda x: abs(slope * x + loc) ** 3 * rate * math.exp(-rate * x)
        a, _ = integrate.quad(f, 0.0, kink)
        b, _ = integrate.quad(f, kink, math.inf)
        return a + b

    def moments(self) -> MomentSummary:
        g0, g1 = self.gamma0, self.gamma1
        D0 = math.log(g0 / g1) + (g1 - g0) / g0
        D1 = math.log(g1 / g0) + (g0 - g1) / g1
        V0 = ((g1 - g0) / g0) ** 2
        V1 = ((g1 - g0) / g1) ** 2
        return MomentSummary(D0, D1, V0, V1, self._abs_third(g0), self._abs_third(g1), D0 * D0 + V0, D1 * D1 + V1)

    def k_step(self, k) -> KStepFunctionals:
        g0, g1 = self.gamma0, self.gamma1
        k = np.asarray(k, dtype=np.int64)
        log_ratio = math.log(g1 / g0)
        x = k * (log_ratio / (g1 - g0))
        # S_k < 0  <=>  sum of the k exponentials < x
        u0_k, _ = erlang_cdf_array(x, k, g0)
        u0_k1, _ = erlang_cdf_array(x, k + 1, g0)
        _, q1_k = erlang_cdf_array(x, k, g1)
        _, q1_k1 = erlang_cdf_array(x, k + 1, g1)
        p_sign = u0_k + q1_k
        neg = k * u0_k * log_ratio - k * (g1 - g0) / g0 * u0_k1
        pos = -k * q1_k * log_ratio + k * (g1 - g0) / g1 * q1_k1
        # rounding can leave a tiny negative residue deep in the tail
        return KStepFunctionals(p_sign, np.maximum(neg, 0.0), np.maximum(pos, 0.0))

    def spec(self) -> dict:
        return {"kind": "exponential", "gamma0": self.gamma0, "gamma1": self.gamma1}


LlrSampler = Callable[[Hypothesis, np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class CustomPair(DistributionPair):
    """A pair described by declared LLR moments and an optional LLR sampler.

    ``span`` declares an arithmetic LLR with that lattice span; such pairs are
    refused by everything that relies on renewal theory. The sampler must be
    picklable (a module-level function) to run with several workers.
    """

    declared: MomentSummary
    sampler: Optional[LlrSampler] = None
    span: Optional[float] = None
    kind: str = field(default="custom", init=False)

    def __post_init__(self):
        if self.span is not None and not self.span > 0:
            raise ValueError("span must be positive")

    @property
    def nonarithmetic(self) -> bool:
        return self.span is None

    def moments(self) -> MomentSummary:
        return self.declared

    def draw_llr(self, hypothesis, rng, size):
        if self.sampler is None:
            raise UnsupportedPairError("custom pair declares no LLR sampler")
        return np.asarray(self.sampler(Hypothesis(hypothesis), rng, size), dtype=float)

    def spec(self) -> dict:
        out = {"kind": "custom", **{k: v for k, v in self.declared.as_dict().items() if not math.isnan(v)}}
        if self.span is not None:
            out["span"] = self.span
        return out


def sample_llr(pair: DistributionPair, hypothesis: Hypothesis, rng: np.random.Generator) -> float:
    return float(pair.draw_llr(hypothesis, rng, 1)[0])


def moments(pair: DistributionPair) -> MomentSummary:
    return pair.moments()


def k_step_functionals(pair: DistributionPair, k) -> KStepFunctionals:
    if isinstance(k, (int, np.integer)) and k < 1:
        raise ValueError("k must be >= 1")
    return pair.k_step(k)


def is_nonarithmetic(pair: DistributionPair) -> bool:
    return pair.nonarithmetic


_SPEC_FIELDS = {
    "gaussian": {"theta0", "theta1"},
    "exponential": {"gamma0", "gamma1"},
    "custom": {"D0", "D1", "V0", "V1", "M3_0", "M3_1", "E2_0", "E2_1", "span"},
}


def pair_from_spec(spec) -> DistributionPair:
    """Build a pair from a dict, a JSON object string, or ``"gaussian 0 1"``.

    Unknown fields are rejected with ``ValueError``.
    """
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("{"):
            spec = json.loads(text)
        else:
            parts = text.replace(",", " ").replace(":", " ").split()
            if len(parts) != 3 or parts[0] not in ("gaussian", "exponential"):
                raise ValueError(f"cannot parse pair spec {spec!r}")
            keys = ("theta0", "theta1") if parts[0] == "gaussian" else ("gamma0", "gamma1")
            spec = {"kind": parts[0], keys[0]: float(parts[1]), keys[1]: float(parts[2])}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"pair spec must be an object with a 'kind' field, got {spec!r}")
    kind = spec["kind"]
    if kind not in _SPEC_FIELDS:
        raise ValueError(f"unknown pair kind {kind!r}")
    extra = set(spec) - _SPEC_FIELDS[kind] - {"kind"}
    if extra:
        raise ValueError(f"unknown fields for {kind} pair: {sorted(extra)}")
    try:
        if kind == "gaussian":
            return GaussianPair(float(spec["theta0"]), float(spec["theta1"]))
        if kind == "exponential":
            return ExponentialPair(float(spec["gamma0"]), float(spec["gamma1"]))
        D0, D1, V0, V1 = (float(spec[k]) for k in ("D0", "D1", "V0", "V1"))
    except KeyError as exc:
        raise ValueError(f"missing field {exc} in {kind} pair spec") from None
    ms = MomentSummary(
        D0,
        D1,
        V0,
        V1,
        float(spec.get("M3_0", math.nan)),
        float(spec.get("M3_1", math.nan)),
        float(spec.get("E2_0", V0 + D0 * D0)),
        float(spec.get("E2_1", V1 + D1 * D1)),
    )
    span = spec.get("span")
    return CustomPair(ms, span=None if span is None else float(span))

"""Limiting-overshoot constants of the LLR random walk.

With ``R`` the limiting overshoot of ``S_n`` over a far upper boundary under
H0, and ``R~`` the limiting undershoot below a far lower boundary under H1::

    A = E[R]            A~ = E[R~]
    B = log E[e^-R]     B~ = log E[e^-R~]

:func:`constants_series` evaluates the classical ladder-height series for
these four numbers; :func:`constants_overshoot_mc` estimates them directly by
simulating first passages over a single large boundary, and serves as the
independent check on the series.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .models import DistributionPair, Hypothesis, UnsupportedPairError
from .simulate import EXIT_DOWN, EXIT_UP, MonteCarloEstimate, simulate_walks

__all__ = [
    "SeriesEstimate",
    "RenewalConstants",
    "RenewalError",
    "SeriesToleranceError",
    "ArithmeticPairError",
    "constants_series",
    "constants_overshoot_mc",
    "sum_series",
]

NAMES = ("A", "A_tilde", "B", "B_tilde")


class RenewalError(ArithmeticError):
    pass


class SeriesToleranceError(RenewalError):
    """The series terms stopped decaying before the tolerance was met."""


class ArithmeticPairError(RenewalError):
    """Renewal constants are only defined here for non-arithmetic LLRs."""


@dataclass(frozen=True)
class SeriesEstimate:
    value: float
    terms_used: int
    tail_bound: float


@dataclass(frozen=True)
class RenewalConstants:
    A: float
    A_tilde: float
    B: float
    B_tilde: float
    details: dict = field(default_factory=dict, compare=False)

    def uncertainty(self, name: str) -> float:
        """Series tail bound or Monte Carlo stderr attached to ``name``."""
        d = self.details.get(name)
        if d is None:
            return 0.0
        if isinstance(d, SeriesEstimate):
            return d.tail_bound
        return d.stderr

    def as_dict(self) -> dict:
        return {n: getattr(self, n) for n in NAMES}


Details = Union[SeriesEstimate, MonteCarloEstimate]


def sum_series(
    terms: Callable[[np.ndarray], np.ndarray],
    tol: float,
    max_terms: int = 10**6,
    chunk: int = 4096,
    window: int = 10,
) -> SeriesEstimate:
    """Sum ``terms(k)`` over ``k = 1, 2, ...`` with a geometric tail test.

    Stops at the first ``K`` where ``t_K < tol * (1 - r)``, ``r`` being the
    per-term decay ratio fitted over the last ``window`` terms; the remainder
    is then bounded by ``t_K * r / (1 - r) < tol``.
    """
    return _sum_many(lambda k: (terms(k),), tol, max_terms, chunk, window)[0]


def _sum_many(terms, tol, max_terms, chunk=4096, window=10) -> list[SeriesEstimate]:
    # several series sharing one (expensive) term evaluation per chunk
    history: list[list[np.ndarray]] | None = None
    results: list[SeriesEstimate | None] | None = None
    start = 1
    while start <= max_terms:
        stop = min(start + chunk, max_terms + 1)
        k = np.arange(start, stop)
        block = terms(k)
        if history is None:
            history = [[] for _ in block]
            results = [None] * len(block)
        for j, t in enumerate(block):
            if results[j] is not None:
                continue
            history[j].append(np.asarray(t, dtype=float))
            allt = np.concatenate(history[j])
            results[j] = _try_stop(allt, start - 1, tol, window)
        if all(r is not None for r in results):
            return results
        start = stop
    raise SeriesToleranceError(f"series did not reach tol={tol} within {max_terms} terms")


def _try_stop(allt: np.ndarray, first_new: int, tol: float, window: int) -> SeriesEstimate | None:
    n = allt.size
    lo = max(first_new, 2 * window)
    if lo >= n:
        return None
    cur = np.abs(allt[lo:])
    mid = np.abs(allt[lo - window : n - window])
    old = np.abs(allt[lo - 2 * window : n - 2 * window])
    k2 = np.arange(lo, n) + 1.0 - 0.5 * window
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(mid > 0, (cur / mid) ** (1.0 / window), 0.0)
        r1 = np.where(old > 0, (mid / old) ** (1.0 / window), 0.0)
    # ratios of terms like k^-p * rho^k creep up towards rho ~ r(k) * (1 + p/k);
    # extrapolate that trend so the geometric tail stays a majorant
    rho = r2 + (k2 - window) * (r2 - r1) / window
    r = np.where((mid > 0) & (old > 0), np.maximum(r2, rho), r2)
    ok = (r < 1.0) & (cur < tol * (1.0 - r))
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return None
    K = lo + int(hits[0])  # zero-based index of t_K
    rK = float(r[hits[0]])
    tail = abs(float(allt[K])) * rK / (1.0 - rK)
    return SeriesEstimate(math.fsum(allt[: K + 1]), K + 1, tail)


def constants_series(pair: DistributionPair, tol: float = 1e-8, max_terms: int = 10**6) -> RenewalConstants:
    """Evaluate A, A~, B, B~ from their series representations.

    Requires a non-arithmetic pair with closed-form k-step functionals
    (:class:`~seqexp.models.GaussianPair`, :class:`~seqexp.models.ExponentialPair`).
    ``B`` and ``B~`` share one series and differ only in ``-log D``.

    Raises
    ------
    ArithmeticPairError
        For pairs declared arithmetic.
    UnsupportedPairError
        For pairs without closed-form k-step functionals.
    SeriesToleranceError
        If the terms stop decaying before ``tol`` is reached.
    """
    if not pair.nonarithmetic:
        raise ArithmeticPairError("LLR is arithmetic; renewal constants are not available")
    ms = pair.moments()
    pair.k_step(np.arange(1, 2))  # raises UnsupportedPairError early

    def terms(k):
        f = pair.k_step(k)
        return f.p_sign / k, f.neg_part_H0 / k, f.pos_part_H1 / k

    s_sign, s_neg, s_pos = _sum_many(terms, tol, max_terms)
    A = ms.E2_0 / (2 * ms.D0) - s_neg.value
    At = ms.E2_1 / (2 * ms.D1) - s_pos.value
    B = -math.log(ms.D0) - s_sign.value
    Bt = -math.log(ms.D1) - s_sign.value
    details = {
        "A": SeriesEstimate(A, s_neg.terms_used, s_neg.tail_bound),
        "A_tilde": SeriesEstimate(At, s_pos.terms_used, s_pos.tail_bound),
        "B": SeriesEstimate(B, s_sign.terms_used, s_sign.tail_bound),
        "B_tilde": SeriesEstimate(Bt, s_sign.terms_used, s_sign.tail_bound),
    }
    return RenewalConstants(A, At, B, Bt, details)


def default_boundary(pair: DistributionPair) -> float:
    ms = pair.moments()
    return 100.0 / min(ms.D0, ms.D1)


def _log_mean_exp_neg(r: np.ndarray) -> MonteCarloEstimate:
    m = MonteCarloEstimate.from_samples(np.exp(-r))
    return MonteCarloEstimate(math.log(m.mean), m.stderr / m.mean, m.trials)


def constants_overshoot_mc(
    pair: DistributionPair,
    boundary: float | None = None,
    trials: int = 10**6,
    seed=0,
    workers: int = 1,
) -> RenewalConstants:
    """Monte Carlo estimates of A, A~, B, B~ from simulated first passages.

    Under H0 the walk runs until ``S_n > boundary`` and ``R = S_T - boundary``;
    under H1 until ``S_n < -boundary`` and ``R~ = -S_T - boundary``. Each entry
    of ``details`` is a :class:`MonteCarloEstimate`; B's stderr is from the
    delta method.
    """
    ms = pair.moments()
    if boundary is None:
        boundary = default_boundary(pair)
    if min(ms.D0, ms.D1) * boundary < 20:
        warnings.warn(
            f"boundary {boundary:g} is only {min(ms.D0, ms.D1) * boundary:.3g} mean steps away; "
            "overshoot may be far from its limit",
            RuntimeWarning,
            stacklevel=2,
        )
    out: dict[str, MonteCarloEstimate] = {}
    for hyp, drift, name in ((Hypothesis.H0, ms.D0, ""), (Hypothesis.H1, ms.D1, "_tilde")):
        cap = int(50 * boundary / drift) + 1000
        if hyp == Hypothesis.H0:
            batch = simulate_walks(pair, hyp, -math.inf, boundary, cap, trials, seed, point=0, workers=workers)
            r = batch.terminal[batch.code == EXIT_UP] - boundary
        else:
            batch = simulate_walks(pair, hyp, -boundary, math.inf, cap, trials, seed, point=1, workers=workers)
            r = -batch.terminal[batch.code == EXIT_DOWN] - boundary
        if r.size < trials:
            warnings.warn(f"{trials - r.size} overshoot walks truncated", RuntimeWarning, stacklevel=2)
        out["A" + name] = MonteCarloEstimate.from_samples(r)
        out["B" + name] = _log_mean_exp_neg(r)
    return RenewalConstants(
        out["A"].mean, out["A_tilde"].mean, out["B"].mean, out["B_tilde"].mean, details=out
    )

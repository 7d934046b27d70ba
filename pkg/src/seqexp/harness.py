"""Monte Carlo estimators and checks of the asymptotic SPRT predictions.

Every estimator takes a ``seed`` (an int or a ``SeedSequence``) plus a
``point`` index; trial blocks draw from streams keyed by
``(seed, point, block)`` so a given call returns identical numbers for any
``workers`` value.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .models import DistributionPair, Hypothesis
from .renewal import RenewalConstants, constants_series
from .simulate import EXIT_DOWN, EXIT_UP, TRUNCATED, MonteCarloEstimate, WalkBatch, block_rng, simulate_walks
from .special import normal_cdf
from .sprt import SprtConfig, thresholds_expectation, thresholds_probabilistic, wald_error_bounds

__all__ = [
    "DEFAULT_SEED",
    "MonteCarloEstimate",
    "ErrorEstimate",
    "StoppingEstimate",
    "LineFit",
    "ConvergenceRow",
    "ConvergenceTable",
    "TradeoffCheck",
    "ProbabilisticPoint",
    "ExpectationPoint",
    "ExperimentPlan",
    "PlanReport",
    "simulate_sprt",
    "estimate_error_probs",
    "estimate_stopping",
    "fit_stopping_line",
    "check_error_convergence",
    "check_rogozin",
    "check_error_tradeoff_bound",
    "run_plan",
]

DEFAULT_SEED = 2020
INVALID_TRUNCATION = 1e-4
CSV_SCHEMA = "#schema=seqexp-v1"


def simulate_sprt(
    pair: DistributionPair,
    hypothesis: Hypothesis,
    cfg: SprtConfig,
    trials: int,
    seed=DEFAULT_SEED,
    point: int = 0,
    workers: int = 1,
) -> WalkBatch:
    """Outcomes of ``trials`` independent SPRTs (codes: 0 = H0, 1 = H1, 2 = truncated)."""
    return simulate_walks(pair, hypothesis, -cfg.alpha, cfg.beta, cfg.max_steps, trials, seed, point, workers)


@dataclass(frozen=True)
class ErrorEstimate:
    """Probability of deciding against the true hypothesis.

    Truncated runs count as trials but never as errors.
    """

    error: MonteCarloEstimate
    truncated: int

    @property
    def truncated_frac(self) -> float:
        return self.truncated / self.error.trials if self.error.trials else math.nan

    @property
    def invalid(self) -> bool:
        return self.truncated_frac > INVALID_TRUNCATION


def _error_from_batch(batch: WalkBatch, hypothesis: Hypothesis) -> ErrorEstimate:
    wrong = EXIT_DOWN if hypothesis == Hypothesis.H0 else EXIT_UP
    hits = int(np.count_nonzero(batch.code == wrong))
    trunc = int(np.count_nonzero(batch.code == TRUNCATED))
    return ErrorEstimate(MonteCarloEstimate.from_count(hits, len(batch)), trunc)


def estimate_error_probs(
    pair: DistributionPair,
    cfg: SprtConfig,
    hypothesis: Hypothesis,
    trials: int,
    seed=DEFAULT_SEED,
    point: int = 0,
    workers: int = 1,
) -> ErrorEstimate:
    """Estimate P_1|0 (``hypothesis=H0``) or P_0|1 (``hypothesis=H1``)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hypothesis = Hypothesis(hypothesis)
    bound = wald_error_bounds(cfg)[hypothesis]
    if trials * bound < 25:
        warnings.warn(
            f"at most {trials * bound:.3g} error events expected; estimate is unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    batch = simulate_sprt(pair, hypothesis, cfg, trials, seed, point, workers)
    return _error_from_batch(batch, hypothesis)


@dataclass(frozen=True)
class StoppingEstimate:
    mean: MonteCarloEstimate
    tail: dict = field(default_factory=dict)
    truncated: int = 0


def _stopping_from_batch(batch: WalkBatch, tail_at: Iterable[int]) -> StoppingEstimate:
    t = batch.stop_time
    tail = {int(n): MonteCarloEstimate.from_count(int(np.count_nonzero(t > n)), t.size) for n in tail_at}
    return StoppingEstimate(
        MonteCarloEstimate.from_samples(t), tail, int(np.count_nonzero(batch.code == TRUNCATED))
    )


def estimate_stopping(
    pair: DistributionPair,
    cfg: SprtConfig,
    hypothesis: Hypothesis,
    trials: int,
    seed=DEFAULT_SEED,
    tail_at: Sequence[int] = (),
    point: int = 0,
    workers: int = 1,
) -> StoppingEstimate:
    """Sample mean of the stopping time and empirical ``P(T > n)`` for each ``n`` in ``tail_at``.

    Truncated runs enter with ``T = max_steps``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    batch = simulate_sprt(pair, hypothesis, cfg, trials, seed, point, workers)
    return _stopping_from_batch(batch, tail_at)


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_se: float
    intercept_se: float
    x: tuple
    y: tuple
    y_se: tuple

    @property
    def residuals(self) -> np.ndarray:
        return np.asarray(self.y) - (self.intercept + self.slope * np.asarray(self.x))


def _weighted_line(x, y, se) -> LineFit:
    x, y, se = (np.asarray(v, dtype=float) for v in (x, y, se))
    w = 1.0 / se**2
    X = np.column_stack([np.ones_like(x), x])
    cov = np.linalg.inv(X.T @ (w[:, None] * X))
    a, b = cov @ (X.T @ (w * y))
    return LineFit(float(b), float(a), math.sqrt(cov[1, 1]), math.sqrt(cov[0, 0]), tuple(x), tuple(y), tuple(se))


def fit_stopping_line(
    pair: DistributionPair,
    boundaries: Sequence[float],
    trials: int,
    seed=DEFAULT_SEED,
    hypothesis: Hypothesis = Hypothesis.H0,
    workers: int = 1,
) -> LineFit:
    """Weighted least-squares fit of E[T] against the boundary ``b`` (alpha = beta = b).

    Renewal theory predicts slope ``1/D`` and intercept ``A/D`` under H0
    (``1/D1`` and ``A~/D1`` under H1).
    """
    ms = pair.moments()
    means, ses = [], []
    for i, b in enumerate(boundaries):
        cfg = SprtConfig.with_default_cap(b, b, ms)
        est = estimate_stopping(pair, cfg, hypothesis, trials, seed, point=i, workers=workers)
        means.append(est.mean.mean)
        ses.append(est.mean.stderr)
    return _weighted_line(boundaries, means, ses)


@dataclass(frozen=True)
class ConvergenceRow:
    boundary: float
    trials: int
    p10: MonteCarloEstimate
    p01: MonteCarloEstimate
    target_p10: float  # e^{B~}
    target_p01: float  # e^{B}

    @property
    def scaled_p10(self) -> MonteCarloEstimate:
        s = math.exp(self.boundary)
        return MonteCarloEstimate(self.p10.mean * s, self.p10.stderr * s, self.p10.trials)

    @property
    def scaled_p01(self) -> MonteCarloEstimate:
        s = math.exp(self.boundary)
        return MonteCarloEstimate(self.p01.mean * s, self.p01.stderr * s, self.p01.trials)

    @property
    def rel_err_p10(self) -> float:
        return abs(self.scaled_p10.mean / self.target_p10 - 1.0)

    @property
    def rel_err_p01(self) -> float:
        return abs(self.scaled_p01.mean / self.target_p01 - 1.0)


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple

    @property
    def diverging(self) -> bool:
        """True when the last point is further from the targets than the first."""
        if len(self.rows) < 2:
            return False
        first, last = self.rows[0], self.rows[-1]
        return max(last.rel_err_p10, last.rel_err_p01) > max(first.rel_err_p10, first.rel_err_p01)


def check_error_convergence(
    pair: DistributionPair,
    boundaries: Sequence[float],
    trial_factor: float = 100.0,
    seed=DEFAULT_SEED,
    constants: Optional[RenewalConstants] = None,
    trials: Optional[int] = None,
    workers: int = 1,
) -> ConvergenceTable:
    """Error probabilities of the symmetric SPRT (alpha = beta = b) scaled by ``e^b``.

    As ``b`` grows, ``P_1|0 * e^b -> e^{B~}`` and ``P_0|1 * e^b -> e^{B}``.
    Uses ``trial_factor * e^b`` trials per boundary unless ``trials`` is given.
    """
    if list(boundaries) != sorted(boundaries):
        raise ValueError("boundaries must be increasing")
    rc = constants if constants is not None else constants_series(pair)
    ms = pair.moments()
    rows = []
    for i, b in enumerate(boundaries):
        n = trials if trials is not None else int(math.ceil(trial_factor * math.exp(b)))
        if n * math.exp(-b) < 100:
            warnings.warn(f"boundary {b}: only {n * math.exp(-b):.3g} error events expected", RuntimeWarning, stacklevel=2)
        cfg = SprtConfig.with_default_cap(b, b, ms)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            e0 = estimate_error_probs(pair, cfg, Hypothesis.H0, n, seed, point=2 * i, workers=workers)
            e1 = estimate_error_probs(pair, cfg, Hypothesis.H1, n, seed, point=2 * i + 1, workers=workers)
        rows.append(ConvergenceRow(b, n, e0.error, e1.error, math.exp(rc.B_tilde), math.exp(rc.B)))
    return ConvergenceTable(tuple(rows))


def check_rogozin(
    pair: DistributionPair,
    n: int,
    trials: int,
    seed=DEFAULT_SEED,
    grid_step: float = 0.01,
    grid_limit: float = 5.0,
    point: int = 0,
) -> float:
    """Sup over a grid of ``|P(M_n <= a) - Phi(a)|`` for the standardised maximal sum.

    ``M_n = (max_{k<=n} S_k - n*D0) / sqrt(n*V0)`` under H0.
    """
    ms = pair.moments()
    if not ms.D0 > 0:
        raise ValueError("needs positive drift under H0")
    grid = np.arange(-grid_limit, grid_limit + grid_step / 2, grid_step)
    counts = np.zeros(grid.size, dtype=np.int64)
    scale = math.sqrt(n * ms.V0)
    per_block = max(1, (1 << 21) // n)
    done, block = 0, 0
    while done < trials:
        m = min(per_block, trials - done)
        rng = block_rng(seed, point, block)
        y = pair.draw_llr(Hypothesis.H0, rng, m * n).reshape(m, n)
        mx = np.cumsum(y, axis=1).max(axis=1)
        z = np.sort((mx - n * ms.D0) / scale)
        counts += np.searchsorted(z, grid, side="right")
        done += m
        block += 1
    return float(np.max(np.abs(counts / trials - normal_cdf(grid))))


@dataclass(frozen=True)
class TradeoffCheck:
    """``P0(E) - gamma*P1(E)`` versus ``P0(S_T >= log gamma)`` for E = {decide H0}."""

    gamma: float
    lhs: MonteCarloEstimate
    rhs: MonteCarloEstimate

    @property
    def combined_stderr(self) -> float:
        return math.hypot(self.lhs.stderr, self.rhs.stderr)

    @property
    def slack(self) -> float:
        return self.rhs.mean - self.lhs.mean

    def holds(self, k: float = 4.0) -> bool:
        return self.lhs.mean <= self.rhs.mean + k * self.combined_stderr


def check_error_tradeoff_bound(
    pair: DistributionPair,
    cfg: SprtConfig,
    gamma: float,
    trials: int,
    seed=DEFAULT_SEED,
    workers: int = 1,
) -> TradeoffCheck:
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    b0 = simulate_sprt(pair, Hypothesis.H0, cfg, trials, seed, point=0, workers=workers)
    b1 = simulate_sprt(pair, Hypothesis.H1, cfg, trials, seed, point=1, workers=workers)
    p0 = MonteCarloEstimate.from_count(int(np.count_nonzero(b0.code == EXIT_UP)), trials)
    p1 = MonteCarloEstimate.from_count(int(np.count_nonzero(b1.code == EXIT_UP)), trials)
    lhs = MonteCarloEstimate(p0.mean - gamma * p1.mean, math.hypot(p0.stderr, gamma * p1.stderr), trials)
    rhs = MonteCarloEstimate.from_count(int(np.count_nonzero(b0.terminal >= math.log(gamma))), trials)
    return TradeoffCheck(gamma, lhs, rhs)


# --- experiment plans -------------------------------------------------------


@dataclass(frozen=True)
class ProbabilisticPoint:
    n: int
    eps: float
    eta: float = 0.0


@dataclass(frozen=True)
class ExpectationPoint:
    n: int
    eta: float
    direction: str = "achievability"


SchedulePoint = Union[SprtConfig, ProbabilisticPoint, ExpectationPoint, tuple]


@dataclass(frozen=True)
class ExperimentPlan:
    pair: DistributionPair
    schedule: tuple = ()
    trials: int = 10_000
    seed: int = DEFAULT_SEED
    workers: int = 1


CSV_COLUMNS = (
    "point_id",
    "boundary_or_n",
    "hypothesis",
    "p10_hat",
    "p10_stderr",
    "p01_hat",
    "p01_stderr",
    "et_hat",
    "et_stderr",
    "tail_hat",
    "truncated_frac",
)


@dataclass(frozen=True)
class PlanReport:
    rows: tuple
    warnings: tuple = ()

    @property
    def invalid_points(self) -> list:
        return sorted({r["point_id"] for r in self.rows if r["invalid"]})

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_SCHEMA + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(["" if r[c] is None else _fmt(r[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"schema": CSV_SCHEMA.split("=", 1)[1], "rows": list(self.rows), "warnings": list(self.warnings)}, indent=2)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def _resolve(point: SchedulePoint, pair: DistributionPair, rc_cache: dict) -> tuple[SprtConfig, Optional[int]]:
    ms = pair.moments()
    if isinstance(point, SprtConfig):
        return point, None
    if isinstance(point, tuple):
        point = ProbabilisticPoint(*point)
    if isinstance(point, ProbabilisticPoint):
        return thresholds_probabilistic(ms, point.n, point.eps, point.eta), point.n
    if isinstance(point, ExpectationPoint):
        if "rc" not in rc_cache:
            rc_cache["rc"] = constants_series(pair)
        rc = rc_cache["rc"]
        return thresholds_expectation(ms, rc.A, rc.A_tilde, point.n, point.eta, point.direction), point.n
    raise TypeError(f"cannot interpret schedule point {point!r}")


def run_plan(plan: ExperimentPlan, workers: Optional[int] = None) -> PlanReport:
    """Simulate every schedule point under both hypotheses.

    Point ``i`` uses stream keys ``2i`` (H0) and ``2i+1`` (H1). A point is
    flagged invalid when more than 1e-4 of its runs were truncated.
    """
    workers = plan.workers if workers is None else workers
    rows, notes = [], []
    rc_cache: dict = {}
    for i, point in enumerate(plan.schedule):
        cfg, n = _resolve(point, plan.pair, rc_cache)
        for hyp in Hypothesis:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                batch = simulate_sprt(plan.pair, hyp, cfg, plan.trials, plan.seed, 2 * i + hyp, workers)
            notes.extend(f"point {i} {hyp.name}: {w.message}" for w in caught)
            err = _error_from_batch(batch, hyp)
            stop = _stopping_from_batch(batch, [n] if n is not None else [])
            rows.append(
                {
                    "point_id": i,
                    "boundary_or_n": n if n is not None else cfg.beta,
                    "alpha": cfg.alpha,
                    "beta": cfg.beta,
                    "hypothesis": hyp.name,
                    "p10_hat": err.error.mean if hyp == Hypothesis.H0 else None,
                    "p10_stderr": err.error.stderr if hyp == Hypothesis.H0 else None,
                    "p01_hat": err.error.mean if hyp == Hypothesis.H1 else None,
                    "p01_stderr": err.error.stderr if hyp == Hypothesis.H1 else None,
                    "et_hat": stop.mean.mean,
                    "et_stderr": stop.mean.stderr,
                    "tail_hat": stop.tail[n].mean if n is not None else None,
                    "truncated_frac": err.truncated_frac,
                    "invalid": err.invalid,
                }
            )
            if err.invalid:
                notes.append(f"point {i} {hyp.name}: truncated fraction {err.truncated_frac:.3g} exceeds 1e-4")
    return PlanReport(tuple(rows), tuple(notes))

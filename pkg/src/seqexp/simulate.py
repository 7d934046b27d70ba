"""Batched random-walk simulation shared by the SPRT, renewal and harness code.

Trials are grouped into fixed-size blocks. Block ``b`` of point ``p`` under
seed ``s`` draws from its own counter-based Philox stream keyed by
``SeedSequence(s, spawn_key=(p, b))``, so results never depend on how blocks
are spread over worker processes. Increments are streamed through a reusable
buffer; only per-trial outcomes are kept.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .models import DistributionPair, Hypothesis

__all__ = ["MonteCarloEstimate", "WalkBatch", "simulate_walks", "block_rng", "BLOCK_TRIALS"]

BLOCK_TRIALS = 1 << 15
_BUFFER = 1 << 16

# outcome codes
EXIT_UP = 0
EXIT_DOWN = 1
TRUNCATED = 2


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    trials: int

    @property
    def ci95_low(self) -> float:
        return self.mean - 1.96 * self.stderr

    @property
    def ci95_high(self) -> float:
        return self.mean + 1.96 * self.stderr

    @classmethod
    def from_samples(cls, x) -> "MonteCarloEstimate":
        x = np.asarray(x, dtype=float)
        n = x.size
        if n == 0:
            return cls(math.nan, math.nan, 0)
        sd = float(x.std(ddof=1)) if n > 1 else 0.0
        return cls(float(x.mean()), sd / math.sqrt(n), n)

    @classmethod
    def from_count(cls, hits: int, trials: int) -> "MonteCarloEstimate":
        """Binomial proportion with stderr ``sqrt(p(1-p)/n)``."""
        if trials <= 0:
            return cls(math.nan, math.nan, 0)
        p = hits / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials)

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "trials": self.trials,
            "ci95_low": self.ci95_low,
            "ci95_high": self.ci95_high,
        }


@dataclass(frozen=True)
class WalkBatch:
    """Per-trial outcomes: exit code, stopping time and terminal sum ``S_T``."""

    code: np.ndarray
    stop_time: np.ndarray
    terminal: np.ndarray

    def __len__(self) -> int:
        return self.code.size


@numba.njit(cache=True)
def _walk_kernel(buf, pos, i, s, t, lower, upper, max_steps, out_code, out_t, out_s):
    n_buf = buf.shape[0]
    n_tr = out_code.shape[0]
    while i < n_tr:
        done = False
        while pos < n_buf:
            s += buf[pos]
            pos += 1
            t += 1
            if s > upper:
                out_code[i] = 0
                done = True
                break
            if s < lower:
                out_code[i] = 1
                done = True
                break
            if t >= max_steps:
                out_code[i] = 2
                done = True
                break
        if not done:
            return pos, i, s, t
        out_t[i] = t
        out_s[i] = s
        i += 1
        s = 0.0
        t = 0
    return pos, i, s, t


def block_rng(seed, point: int, block: int) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        seed = seed.entropy
    ss = np.random.SeedSequence(seed, spawn_key=(int(point), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def _run_block(args) -> WalkBatch:
    pair, hypothesis, lower, upper, max_steps, n, seed, point, block = args
    rng = block_rng(seed, point, block)
    code = np.empty(n, dtype=np.int8)
    stop = np.empty(n, dtype=np.int64)
    term = np.empty(n, dtype=float)
    pos, i, s, t = _BUFFER, 0, 0.0, 0
    buf = np.empty(0)
    while i < n:
        if pos >= buf.shape[0]:
            buf = pair.draw_llr(hypothesis, rng, _BUFFER)
            pos = 0
        pos, i, s, t = _walk_kernel(buf, pos, i, s, t, lower, upper, max_steps, code, stop, term)
    return WalkBatch(code, stop, term)


def simulate_walks(
    pair: DistributionPair,
    hypothesis: Hypothesis,
    lower: float,
    upper: float,
    max_steps: int,
    trials: int,
    seed,
    point: int = 0,
    workers: int = 1,
) -> WalkBatch:
    """Run ``trials`` independent walks until ``S_n`` leaves ``[lower, upper]``.

    Exits are strict (``S_n > upper`` or ``S_n < lower``); a walk still inside
    after ``max_steps`` steps is reported as truncated. Either bound may be
    infinite for one-sided passage problems.
    """
    if trials < 0:
        raise ValueError("trials must be >= 0")
    if not lower < 0.0 < upper:
        raise ValueError(f"need lower < 0 < upper, got [{lower}, {upper}]")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    sizes = [BLOCK_TRIALS] * (trials // BLOCK_TRIALS)
    if trials % BLOCK_TRIALS:
        sizes.append(trials % BLOCK_TRIALS)
    jobs = [
        (pair, Hypothesis(hypothesis), float(lower), float(upper), int(max_steps), n, seed, point, b)
        for b, n in enumerate(sizes)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_block, jobs))
    else:
        parts = [_run_block(j) for j in jobs]
    if not parts:
        return WalkBatch(np.empty(0, np.int8), np.empty(0, np.int64), np.empty(0))
    return WalkBatch(
        np.concatenate([p.code for p in parts]),
        np.concatenate([p.stop_time for p in parts]),
        np.concatenate([p.terminal for p in parts]),
    )

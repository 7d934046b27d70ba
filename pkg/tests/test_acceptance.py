"""Acceptance criteria 1-12, each at its stated tolerance.

Run ``pytest tests/test_acceptance.py -v``; a summary with one PASS/FAIL line
per criterion is printed at the end of the session.
"""
import json
import math
import warnings

import numpy as np
import pytest

from seqexp.cli import main as cli_main
from seqexp.exponents import second_order_expectation
from seqexp.harness import (
    DEFAULT_SEED,
    check_error_convergence,
    check_error_tradeoff_bound,
    check_rogozin,
    estimate_error_probs,
    estimate_stopping,
    fit_stopping_line,
)
from seqexp.models import ExponentialPair, GaussianPair, Hypothesis
from seqexp.renewal import NAMES, constants_overshoot_mc, constants_series
from seqexp.sprt import SprtConfig, thresholds_expectation, thresholds_probabilistic, wald_error_bounds

pytestmark = pytest.mark.slow

GAUSS = GaussianPair(0.0, 1.0)
EXPO = ExponentialPair(1.0, 2.0)
FAMILIES = [GAUSS, EXPO]


def test_01_closed_forms(verdict):
    g = GAUSS.moments()
    e = EXPO.moments()
    ok = (g.D0, g.D1, g.V0, g.V1, g.E2_0, g.E2_1) == (0.5, 0.5, 1.0, 1.0, 1.25, 1.25)
    err = max(abs(e.D0 - (1 - math.log(2))), abs(e.D1 - (math.log(2) - 0.5)))
    ok = ok and err <= 1e-12
    assert verdict(1, ok, f"gaussian exact={ok}, exponential max err={err:.1e}")


def _moment_zscores(pair, hyp, ms, n, rng):
    y = pair.draw_llr(hyp, rng, n)
    i = int(hyp)
    mean = (ms.D0, -ms.D1)[i]
    fields = {
        f"D{i}": (y, mean),
        f"E2_{i}": (y**2, (ms.E2_0, ms.E2_1)[i]),
        f"M3_{i}": (np.abs(y) ** 3, (ms.M3_0, ms.M3_1)[i]),
        f"V{i}": ((y - y.mean()) ** 2, (ms.V0, ms.V1)[i]),
    }
    z = {}
    for name, (x, target) in fields.items():
        est = x.mean() * (n / (n - 1) if name.startswith("V") else 1.0)
        z[name] = abs(est - target) / (x.std(ddof=1) / math.sqrt(n))
    return z


def test_02_monte_carlo_moments(verdict):
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = {}
    for pair in FAMILIES:
        ms = pair.moments()
        for hyp in Hypothesis:
            for name, z in _moment_zscores(pair, hyp, ms, 10**6, rng).items():
                worst[f"{type(pair).__name__}.{name}"] = z
    key = max(worst, key=worst.get)
    ok = worst[key] <= 5.0
    assert verdict(2, ok, f"max |z| = {worst[key]:.2f} ({key}) over {len(worst)} fields, limit 5")


def _random_pair(rng):
    if rng.random() < 0.5:
        return GaussianPair(0.0, float(rng.uniform(0.5, 2.0)))
    return ExponentialPair(float(rng.uniform(0.2, 0.7)), 1.0)


def test_03_wald_bounds(verdict):
    rng = np.random.default_rng(DEFAULT_SEED + 3)
    worst, bad = -math.inf, []
    for i in range(20):
        pair = _random_pair(rng)
        alpha, beta = (float(v) for v in rng.uniform(2.0, 8.0, size=2))
        cfg = SprtConfig.with_default_cap(alpha, beta, pair.moments())
        bounds = wald_error_bounds(cfg)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            for hyp in Hypothesis:
                est = estimate_error_probs(pair, cfg, hyp, 10**6, DEFAULT_SEED, point=2 * i + hyp).error
                margin = (est.mean - 4 * est.stderr) / bounds[hyp]
                worst = max(worst, margin)
                if margin > 1.0:
                    bad.append((i, hyp.name))
    ok = not bad
    assert verdict(3, ok, f"40 checks, max (P_hat - 4se)/bound = {worst:.3f}, violations {bad}")


def test_04_renewal_cross_validation(verdict):
    lines, ok = [], True
    for pair in FAMILIES:
        rc = constants_series(pair, tol=1e-8)
        mc = constants_overshoot_mc(pair, trials=10**6, seed=DEFAULT_SEED)
        for name in NAMES:
            est = mc.details[name]
            dev = abs(est.mean - getattr(rc, name))
            lim = 4 * est.stderr + rc.uncertainty(name)
            ok &= dev <= lim
            lines.append(f"{type(pair).__name__[:4]}.{name} {dev / lim:.2f}")
    assert verdict(4, ok, "dev/limit: " + ", ".join(lines))


def test_05_stopping_time_line(verdict):
    parts, ok = [], True
    for pair in FAMILIES:
        ms = pair.moments()
        rc = constants_series(pair)
        fit = fit_stopping_line(pair, [10.0, 20.0, 40.0, 80.0], trials=10**5, seed=DEFAULT_SEED)
        slope_err = abs(fit.slope * ms.D0 - 1.0)
        z = abs(fit.intercept - rc.A / ms.D0) / fit.intercept_se
        ok &= slope_err <= 0.02 and z <= 4.0
        parts.append(f"{type(pair).__name__}: slope rel err {slope_err:.4f}, intercept {z:.2f} sigma")
    assert verdict(5, ok, "; ".join(parts))


def test_06_error_probability_convergence(verdict):
    parts, ok = [], True
    for pair in FAMILIES:
        table = check_error_convergence(pair, [4.0, 6.0, 8.0], trial_factor=100.0, seed=DEFAULT_SEED)
        last = table.rows[-1]
        seq10 = ", ".join(f"{r.scaled_p10.mean:.3f}" for r in table.rows)
        seq01 = ", ".join(f"{r.scaled_p01.mean:.3f}" for r in table.rows)
        ok &= last.rel_err_p10 <= 0.15 and last.rel_err_p01 <= 0.15
        parts.append(
            f"{type(pair).__name__}: P10*e^b [{seq10}] -> {last.target_p10:.3f} (rel err {last.rel_err_p10:.3f}, "
            f"{last.rel_err_p10 * last.target_p10 / last.scaled_p10.stderr:.1f} se); "
            f"P01*e^b [{seq01}] -> {last.target_p01:.3f} (rel err {last.rel_err_p01:.3f})"
        )
    assert verdict(6, ok, "; ".join(parts))


def test_07_probabilistic_achievability(verdict):
    n, eps, eta = 400, 0.2, 0.05
    ms = GAUSS.moments()
    cfg = thresholds_probabilistic(ms, n, eps, eta)
    bound = cfg.alpha - 1.0
    tails = []
    for hyp in Hypothesis:
        est = estimate_stopping(GAUSS, cfg, hyp, 10**5, DEFAULT_SEED, point=hyp, tail_at=[n])
        tails.append(est.tail[n].mean)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        p10 = estimate_error_probs(GAUSS, cfg, Hypothesis.H0, 10**5, DEFAULT_SEED, point=0).error.mean
    neglog = math.inf if p10 == 0 else -math.log(p10)
    ok = max(tails) <= eps and neglog >= bound
    assert verdict(7, ok, f"P(T>n) = {tails[0]:.4f}/{tails[1]:.4f} <= {eps}; -log P10 = {neglog} >= {bound:.2f}")


def test_08_expectation_achievability(verdict):
    n, parts, ok = 1000, [], True
    for pair in FAMILIES:
        ms = pair.moments()
        rc = constants_series(pair)
        cfg = thresholds_expectation(ms, rc.A, rc.A_tilde, n, 1.0, "achievability")
        for hyp in Hypothesis:
            m = estimate_stopping(pair, cfg, hyp, 10**5, DEFAULT_SEED, point=hyp).mean
            ok &= m.mean - 4 * m.stderr <= n
            parts.append(f"{type(pair).__name__[:4]}/{hyp.name} {m.mean:.2f}+-{m.stderr:.2f}")
    assert verdict(8, ok, "E[T]: " + ", ".join(parts) + f" vs n={n}")


def test_09_f_structure(verdict):
    lams = np.linspace(0.0, 1.0, 101)
    flat, affine = 0.0, 0.0
    for d in (0.25, 0.5, 1.0, 2.0, 3.0):
        rc = constants_series(GaussianPair(0.0, d))
        f = np.array([second_order_expectation(rc, lam).second_order for lam in lams])
        flat = max(flat, f.max() - f.min())
    for pair in [GaussianPair(0.0, 1.0), ExponentialPair(1.0, 2.0), ExponentialPair(0.3, 1.0), ExponentialPair(0.8, 1.0)]:
        rc = constants_series(pair)
        f = np.array([second_order_expectation(rc, lam).second_order for lam in lams])
        line = (1 - lams) * f[0] + lams * f[-1]
        scale = max(1.0, np.abs(f).max())
        affine = max(affine, float(np.max(np.abs(f - line))) / scale)
    ok = flat <= 1e-6 and affine <= 1e-13
    assert verdict(9, ok, f"gaussian max-min {flat:.1e} (limit 1e-6), affine residual {affine:.1e}")


def test_10_rogozin_scaling(verdict):
    ns = [25, 100, 400]
    sups = [check_rogozin(GAUSS, n, 10**6, DEFAULT_SEED, point=i) for i, n in enumerate(ns)]
    scaled = [s * math.sqrt(n) for s, n in zip(sups, ns)]
    decreasing = all(a > b for a, b in zip(sups, sups[1:]))
    band = max(scaled) / min(scaled)
    ok = decreasing and band <= 3.0
    sup_s = ", ".join(f"{s:.4f}" for s in sups)
    assert verdict(10, ok, f"sup = [{sup_s}], sup*sqrt(n) band ratio {band:.2f} (limit 3)")


def test_11_error_tradeoff_inequality(verdict):
    rng = np.random.default_rng(DEFAULT_SEED + 11)
    worst, ok = -math.inf, True
    for i in range(10):
        pair = _random_pair(rng)
        alpha, beta = (float(v) for v in rng.uniform(1.0, 6.0, size=2))
        gamma = float(math.exp(rng.uniform(-2.0, 3.0)))
        cfg = SprtConfig.with_default_cap(alpha, beta, pair.moments())
        chk = check_error_tradeoff_bound(pair, cfg, gamma, 10**5, DEFAULT_SEED + i)
        ok &= chk.holds(4.0)
        worst = max(worst, (chk.lhs.mean - chk.rhs.mean) / chk.combined_stderr)
    assert verdict(11, ok, f"10 settings, max (lhs - rhs)/se = {worst:.2f} (limit 4)")


def test_12_determinism(verdict, tmp_path):
    plan = {
        "pair": {"kind": "exponential", "gamma0": 1.0, "gamma1": 2.0},
        "schedule": [
            {"alpha": 4.0, "beta": 5.0},
            {"n": 200, "eps": 0.2, "eta": 0.05},
            {"n": 300, "eta": 1.0, "constraint": "expectation"},
        ],
        "trials": 100_000,
        "seed": DEFAULT_SEED,
    }
    cfg = tmp_path / "plan.json"
    cfg.write_text(json.dumps(plan))
    blobs = []
    for workers in (1, 8):
        out = tmp_path / f"w{workers}.csv"
        code = cli_main(["simulate", "--config", str(cfg), "--workers", str(workers), "--out", str(out)])
        assert code == 0
        blobs.append(out.read_bytes())
    ok = blobs[0] == blobs[1]
    assert verdict(12, ok, f"1 vs 8 workers, {len(blobs[0])} bytes, identical={ok}")

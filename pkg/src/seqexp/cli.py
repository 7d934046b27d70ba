"""Command-line front end.

Each invocation reads an optional JSON config (``--config``); command-line
flags override its fields. Exit codes: 0 success, 2 config error,
3 numerical failure, 4 invalid simulation points.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

from .exponents import second_order_expectation, second_order_probabilistic
from .harness import (
    CSV_SCHEMA,
    DEFAULT_SEED,
    ExpectationPoint,
    ExperimentPlan,
    ProbabilisticPoint,
    run_plan,
)
from .models import ExponentialPair, GaussianPair, UnsupportedPairError, pair_from_spec
from .renewal import NAMES, RenewalError, constants_overshoot_mc, constants_series
from .sprt import SprtConfig

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_INVALID = 4

_ALLOWED = {
    "moments": {"pair", "format", "out"},
    "constants": {"pair", "tol", "max_terms", "oracle", "trials", "boundary", "seed", "workers", "format", "out"},
    "exponents": {"pair", "constraint", "lambda", "eps", "tol", "format", "out"},
    "simulate": {"pair", "schedule", "trials", "seed", "workers", "eta", "format", "out"},
    "figure": {"which", "params", "lambda", "tol", "max_terms", "format", "out"},
}


class ConfigError(ValueError):
    pass


def _floats(text):
    if text is None or isinstance(text, list):
        return text
    return [float(v) for v in str(text).split(",") if v.strip()]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seqexp", description="SPRT error exponents and renewal constants")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, pair=True):
        sp.add_argument("--config", help="JSON config file; flags override its fields")
        if pair:
            sp.add_argument("--pair", help='pair spec, e.g. "gaussian 0 1" or a JSON object')
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--out", help="output path (default: stdout)")

    common(sub.add_parser("moments", help="LLR moments of a pair"))

    sp = sub.add_parser("constants", help="renewal constants A, A~, B, B~")
    common(sp)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--max-terms", dest="max_terms", type=int)
    sp.add_argument("--oracle", action="store_true", default=None, help="also run the overshoot Monte Carlo")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--boundary", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)

    sp = sub.add_parser("exponents", help="second-order exponents G or F")
    common(sp)
    sp.add_argument("--constraint", choices=("prob", "expect"))
    sp.add_argument("--lambda", dest="lambda", help="value or comma-separated list")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--tol", type=float)

    sp = sub.add_parser("simulate", help="run an experiment plan")
    common(sp)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--eta", type=float, help="default eta for threshold-constructed schedule points")

    sp = sub.add_parser("figure", help="F(lambda) grids for the two worked families")
    common(sp, pair=False)
    sp.add_argument("which", type=int, choices=(1, 2), nargs="?")
    sp.add_argument("--params", help="comma-separated family parameters (delta-theta or gamma)")
    sp.add_argument("--lambda", dest="lambda", help="comma-separated lambda grid")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--max-terms", dest="max_terms", type=int)
    return p


def _load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _ALLOWED[args.command]
    if unknown:
        raise ConfigError(f"unknown config fields for {args.command}: {sorted(unknown)}")
    for key in _ALLOWED[args.command]:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _emit(cfg: dict, rows: list[dict], columns: list[str], extra_lines=()) -> None:
    fmt = cfg.get("format", "json")
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(CSV_SCHEMA + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
        for line in extra_lines:
            buf.write(line + "\n")
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps({"schema": CSV_SCHEMA.split("=", 1)[1], "rows": rows, "notes": list(extra_lines)}, indent=2) + "\n"
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    _write(cfg, text)


def _write(cfg: dict, text: str) -> None:
    out = cfg.get("out")
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _pair(cfg):
    if "pair" not in cfg:
        raise ConfigError("a pair spec is required (--pair)")
    try:
        return pair_from_spec(cfg["pair"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def cmd_moments(cfg: dict) -> int:
    ms = _pair(cfg).moments()
    d = ms.as_dict()
    _emit(cfg, [d], list(d))
    return 0


def cmd_constants(cfg: dict) -> int:
    pair = _pair(cfg)
    rc = constants_series(pair, float(cfg.get("tol", 1e-8)), int(cfg.get("max_terms", 10**6)))
    rows = []
    mc = None
    if cfg.get("oracle"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            mc = constants_overshoot_mc(
                pair,
                cfg.get("boundary"),
                int(cfg.get("trials", 10**5)),
                int(cfg.get("seed", DEFAULT_SEED)),
                int(cfg.get("workers", 1)),
            )
    for name in NAMES:
        se = rc.details[name]
        row = {"constant": name, "value": getattr(rc, name), "terms_used": se.terms_used, "tail_bound": se.tail_bound}
        if mc is not None:
            m = mc.details[name]
            row.update(
                mc_value=m.mean,
                mc_stderr=m.stderr,
                agree_4sigma=abs(m.mean - row["value"]) <= 4 * m.stderr + se.tail_bound,
            )
        rows.append(row)
    cols = ["constant", "value", "terms_used", "tail_bound"]
    if mc is not None:
        cols += ["mc_value", "mc_stderr", "agree_4sigma"]
    _emit(cfg, rows, cols)
    return 0


def cmd_exponents(cfg: dict) -> int:
    pair = _pair(cfg)
    ms = pair.moments()
    lams = _floats(cfg.get("lambda", "0.5"))
    if isinstance(lams, (int, float)):
        lams = [float(lams)]
    constraint = cfg.get("constraint", "prob")
    rows = []
    if constraint == "prob":
        if "eps" not in cfg:
            raise ConfigError("--eps is required for the probabilistic constraint")
        for lam in lams:
            rows.append(second_order_probabilistic(ms, lam, float(cfg["eps"])).as_dict())
    elif constraint == "expect":
        rc = constants_series(pair, float(cfg.get("tol", 1e-8)))
        for lam in lams:
            rows.append(second_order_expectation(rc, lam, ms).as_dict())
    else:
        raise ConfigError(f"unknown constraint {constraint!r}")
    _emit(cfg, rows, ["constraint", "lambda", "eps", "first_order", "second_order", "normalization"])
    return 0


def _schedule_point(d, eta=0.0):
    if not isinstance(d, dict):
        raise ConfigError(f"schedule entries must be objects, got {d!r}")
    keys = set(d)
    if keys <= {"alpha", "beta", "max_steps"} and {"alpha", "beta"} <= keys:
        return d
    if keys <= {"n", "eps", "eta"} and {"n", "eps"} <= keys:
        return ProbabilisticPoint(int(d["n"]), float(d["eps"]), float(d.get("eta", eta)))
    if keys <= {"n", "eta", "constraint", "direction"} and d.get("constraint") == "expectation":
        return ExpectationPoint(int(d["n"]), float(d.get("eta", eta)), d.get("direction", "achievability"))
    raise ConfigError(f"cannot interpret schedule entry {d!r}")


def cmd_simulate(cfg: dict) -> int:
    pair = _pair(cfg)
    schedule = []
    for d in cfg.get("schedule", []):
        pt = _schedule_point(d, float(cfg.get("eta", 0.0)))
        if isinstance(pt, dict):
            ms = pair.moments()
            base = SprtConfig.with_default_cap(float(pt["alpha"]), float(pt["beta"]), ms)
            pt = SprtConfig(base.alpha, base.beta, int(pt.get("max_steps", base.max_steps)))
        schedule.append(pt)
    plan = ExperimentPlan(
        pair,
        tuple(schedule),
        int(cfg.get("trials", 10_000)),
        int(cfg.get("seed", DEFAULT_SEED)),
        int(cfg.get("workers", 1)),
    )
    report = run_plan(plan)
    text = report.to_csv() if cfg.get("format", "csv") == "csv" else report.to_json() + "\n"
    _write(cfg, text)
    for note in report.warnings:
        print(f"warning: {note}", file=sys.stderr)
    return EXIT_INVALID if report.invalid_points else 0


FIGURE_COLUMNS = ["family_param", "lambda", "F_value", "A", "A_tilde", "B", "B_tilde"]
_FIG_DEFAULTS = {
    1: [round(0.25 * i, 2) for i in range(1, 13)],
    2: [round(0.05 * i, 2) for i in range(1, 20)] + [0.99],
}


def figure_rows(which: int, params, lams, tol: float = 1e-8, max_terms: int = 10**5):
    """F(lambda) grid rows plus comment lines for points whose series failed."""
    rows, flagged = [], []
    for p in params:
        pair = GaussianPair(0.0, p) if which == 1 else ExponentialPair(p, 1.0)
        try:
            rc = constants_series(pair, tol, max_terms)
        except RenewalError as exc:
            flagged.append(f"#flagged family_param={p!r}: {exc}")
            continue
        for lam in lams:
            f = second_order_expectation(rc, lam).second_order
            rows.append(dict(family_param=p, **{"lambda": lam}, F_value=f, **rc.as_dict()))
    return rows, flagged


def cmd_figure(cfg: dict) -> int:
    which = int(cfg.get("which", 1))
    if which not in (1, 2):
        raise ConfigError("figure must be 1 or 2")
    params = _floats(cfg.get("params")) or _FIG_DEFAULTS[which]
    lams = _floats(cfg.get("lambda")) or [round(0.1 * i, 1) for i in range(11)]
    if which == 2 and any(not 0 < g < 1 for g in params):
        raise ConfigError("figure 2 sweeps gamma0 = gamma in (0, 1) against gamma1 = 1")
    if which == 1 and any(g == 0 for g in params):
        raise ConfigError("figure 1 needs nonzero delta-theta")
    rows, flagged = figure_rows(which, params, lams, float(cfg.get("tol", 1e-8)), int(cfg.get("max_terms", 10**5)))
    cfg.setdefault("format", "csv")
    _emit(cfg, rows, FIGURE_COLUMNS, flagged)
    if flagged:
        print(f"numerical failure: {len(flagged)} parameter(s) flagged", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


_COMMANDS = {
    "moments": cmd_moments,
    "constants": cmd_constants,
    "exponents": cmd_exponents,
    "simulate": cmd_simulate,
    "figure": cmd_figure,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        cfg = _load_config(args)
        return _COMMANDS[args.command](cfg)
    except (RenewalError, UnsupportedPairError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``superhedge <command> ...``.

Exit codes: 0 success, 1 unexpected failure (or a failing self-test),
2 invalid input, 3 AIP violation in the model parameters, 4 insufficient data.
Reports go to stdout as ``key: value`` lines.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import backtest as bt
from . import calibration as cal
from . import tree as tr
from .convex import INF, AIPViolation
from .interval import IntervalModelParams, bs_reference_price, price_exact, price_recursive
from .payoffs import PayoffSpecError, PiecewisePayoff, parse_payoff

EXIT_OK, EXIT_ERROR, EXIT_INPUT, EXIT_AIP, EXIT_DATA = 0, 1, 2, 3, 4
CONFIG_ENV = "SUPERHEDGE_CONFIG"


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    out = []
    for item in text.split(","):
        item = item.strip().lower()
        out.append(INF if item in ("inf", "+inf", "infinity") else float(item))
    if any(math.isnan(v) for v in out):
        raise ValueError("NaN is not allowed")
    return out


def _choice(*options):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _strike(text: str):
    return None if text.lower() == "atm" else float(text)


CONFIG_KEYS = {
    "S0": float,
    "n": int,
    "k_d": _floats,
    "k_u": _floats,
    "sigma": _floats,
    "T": float,
    "dt": float,
    "payoff": str,
    "strike": _strike,
    "option": _choice("call", "put"),
    "window": int,
    "estimator": _choice("symmetric", "asymmetric"),
    "pooled": _bool,
    "mode": _choice("week", "chunk"),
    "bins": int,
    "jobs": int,
    "seed": int,
    "lattice": str,
    "episodes_out": str,
    "histogram_out": str,
}


def parse_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise ConfigError(f"config line {lineno}: expected key=value")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](val)
        except ValueError as exc:
            raise ConfigError(f"config line {lineno}: bad value for {key}: {exc}") from None
    return out


def load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        return parse_config(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None


def _merged(args: argparse.Namespace) -> dict:
    cfg = load_config(getattr(args, "config", None))
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            try:
                cfg[key] = CONFIG_KEYS[key](val) if isinstance(val, str) else val
            except ValueError as exc:
                raise ConfigError(f"bad value for --{key.replace('_', '-')}: {exc}") from None
    return cfg


def _emit(lines) -> None:
    sys.stdout.write("".join(f"{line}\n" for line in lines))


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            return str(float(x))
        text = f"{float(x):.10f}".rstrip("0").rstrip(".")
        return "0" if text == "-0" else text
    if isinstance(x, (tuple, list, np.ndarray)):
        return ",".join(_fmt(float(v)) for v in x)
    return str(x)


# ---------------------------------------------------------------------------
# commands

def cmd_analyze_tree(args) -> int:
    tree = tr.read_tree(args.tree)
    payoff = parse_payoff(args.payoff) if args.payoff else PiecewisePayoff.zero()
    aip = tr.check_AIP(tree)
    na = tr.check_NA(tree)
    acmm = tr.find_acmm(tree)
    lines = [f"nodes: {len(tree)}", f"depth: {tree.T}", f"dimension: {tree.dim}"]
    lines.append("AIP: yes" if aip else f"AIP: no (immediate profit at node {aip.node})")
    lines.append("NA: yes" if na else f"NA: no (arbitrage at node {na.node}, theta={_fmt(na.theta)})")
    lines.append(f"AWIP: {'yes' if tr.check_AWIP(tree) else 'no'}")
    lines.append(f"acmm: {'found' if acmm else 'infeasible'}")
    if acmm:
        lines += [f"rho.{nid}: {_fmt(r)}" for nid, r in acmm.measure.rho.items()]
    prices = tr.multi_period_price(tree, payoff)
    lines.append(f"payoff: {payoff}")
    lines.append(f"price: {_fmt(prices[tree.root])}")
    for node in tree:
        if tree.is_leaf(node.id):
            continue
        a_ok, _ = tr.local_aip(tree, node.id)
        n_ok, _ = tr.local_na(tree, node.id)
        lines.append(
            f"node.{node.id}: t={node.t} S={_fmt(node.S)} AIP={'yes' if a_ok else 'no'} "
            f"NA={'yes' if n_ok else 'no'} price={_fmt(prices.value[node.id])} "
            f"theta={_fmt(prices.theta[node.id])}"
        )
    _emit(lines)
    return EXIT_OK


def _model(cfg: dict) -> IntervalModelParams:
    if "S0" not in cfg or "n" not in cfg:
        raise ConfigError("price needs S0 and n")
    n, S0 = cfg["n"], cfg["S0"]
    T = cfg.get("T", 1.0)
    if "k_d" in cfg or "k_u" in cfg:
        if "k_d" not in cfg or "k_u" not in cfg:
            raise ConfigError("give both k_d and k_u")
        kd = cfg["k_d"] * n if len(cfg["k_d"]) == 1 else cfg["k_d"]
        ku = cfg["k_u"] * n if len(cfg["k_u"]) == 1 else cfg["k_u"]
        return IntervalModelParams(n, kd, ku, S0, cfg.get("dt", T / n))
    if "sigma" in cfg:
        sig = cfg["sigma"] * n if len(cfg["sigma"]) == 1 else cfg["sigma"]
        return IntervalModelParams.symmetric(sig, S0, n, T)
    raise ConfigError("give k_d and k_u, or sigma")


def _price_payoff(cfg: dict) -> PiecewisePayoff:
    if "payoff" in cfg:
        return parse_payoff(cfg["payoff"])
    K = cfg.get("strike")
    return PiecewisePayoff.call(cfg["S0"] if K is None else K) if cfg.get("option", "call") == "call" \
        else PiecewisePayoff.put(cfg["S0"] if K is None else K)


def cmd_price(args) -> int:
    cfg = _merged(args)
    params = _model(cfg)
    payoff = _price_payoff(cfg)
    t = params.aip_violation()
    if t is not None:
        print(f"error: AIP violation at step {t}: k_d={params.k_d[t]}, k_u={params.k_u[t]}", file=sys.stderr)
        return EXIT_AIP
    lattice = price_recursive(params, payoff)
    lines = [f"payoff: {payoff}", f"steps: {params.n}", f"S0: {_fmt(params.S0)}",
             f"price: {_fmt(lattice.root_value)}"]
    if params.n:
        lines.append(f"theta0: {_fmt(lattice.theta(0, params.S0))}")
    if args.exact:
        q = price_exact(params, payoff)
        lines.append(f"price_exact: {q.numerator}/{q.denominator}" if q.denominator != 1 else f"price_exact: {q}")
    if args.bs_check:
        K = bt.strike_of(payoff)
        if K is None or not payoff.label.startswith("call"):
            raise ConfigError("--bs-check needs a call payoff")
        sigma = cfg.get("sigma")
        if sigma is None:
            raise ConfigError("--bs-check needs sigma")
        ref = bs_reference_price(params.S0, K, cfg.get("T", 1.0), sigma if len(sigma) > 1 else sigma[0])
        lines += [f"bs_reference: {_fmt(ref)}", f"bs_abs_error: {_fmt(abs(lattice.root_value - ref))}"]
    if cfg.get("lattice"):
        if lattice.has_grid:
            Path(cfg["lattice"]).write_text(lattice.to_tsv(), encoding="utf-8")
            lines.append(f"lattice: {cfg['lattice']}")
        else:
            print("warning: lattice grid not materialized for this model size", file=sys.stderr)
    _emit(lines)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _merged(args)
    series = cal.read_csv(args.csv)
    n = cfg.get("n", 4)
    eps = cal.episodes(series, n, cfg.get("mode", "week"))
    W = cfg.get("window", 52)
    if len(eps) < W:
        raise cal.InsufficientDataError(f"need {W} complete episodes, found {len(eps)}")
    window = eps[-W:]
    est = cal.estimate(window, cfg.get("estimator", "symmetric"), cfg.get("dt"), cfg.get("pooled", False))
    lines = [f"estimator: {est.kind}", f"episodes: {W}", f"steps: {est.steps}", f"dt: {_fmt(est.dt)}",
             f"first: {window[0].key}", f"last: {window[-1].key}",
             f"k_d: {_fmt(est.k_d)}", f"k_u: {_fmt(est.k_u)}"]
    if est.sigma is not None:
        lines.append(f"sigma: {_fmt(est.sigma)}")
        lines.append(f"coverage: {_fmt(cal.coverage_ratio(window, est))}")
    else:
        lines.append(f"coverage: {_fmt(cal.bounds_coverage(window, est.k_d, est.k_u))}")
    lines.append(f"aip_clamped: {'yes' if est.aip_flag else 'no'}")
    _emit(lines)
    return EXIT_OK


def cmd_backtest(args) -> int:
    cfg = _merged(args)
    series = cal.read_csv(args.csv)
    rc = bt.RollingConfig(
        window=cfg.get("window", 52),
        n=cfg.get("n", 4),
        estimator=cfg.get("estimator", "symmetric"),
        strike=cfg.get("strike"),
        option=cfg.get("option", "call"),
        dt=cfg.get("dt"),
        pooled=cfg.get("pooled", False),
        mode=cfg.get("mode", "week"),
    )
    result = bt.run_rolling(series, rc, jobs=cfg.get("jobs", 1))
    lines = result.summary_lines()
    if cfg.get("episodes_out"):
        Path(cfg["episodes_out"]).write_text(result.episodes_tsv(), encoding="utf-8")
        lines.append(f"episodes_out: {cfg['episodes_out']}")
    if cfg.get("histogram_out"):
        Path(cfg["histogram_out"]).write_text(result.histogram_tsv(cfg.get("bins", 20)), encoding="utf-8")
        lines.append(f"histogram_out: {cfg['histogram_out']}")
    _emit(lines)
    return EXIT_OK


def cmd_selftest(args) -> int:
    """Seeded cross-checks of the pricers against the LP oracle."""
    rng = np.random.default_rng(args.seed)
    fails = {"tree_dp": 0, "aip_acmm": 0, "interval": 0}
    for _ in range(args.trees):
        tree = tr.random_tree(rng)
        g = {n.id: float(rng.uniform(0, 50)) for n in tree if tree.is_leaf(n.id)}
        pp = tr.multi_period_price(tree, g)
        for nid in tree.ids:
            if not tree.is_leaf(nid) and not _close(pp[nid], tr.brute_force_superhedge(tree, g, nid)):
                fails["tree_dp"] += 1
        if bool(tr.check_AIP(tree)) != bool(tr.check_AWIP(tree)):
            fails["aip_acmm"] += 1
    for _ in range(args.trees):
        n = int(rng.integers(1, 6))
        kd = [float(rng.uniform(0, 1)) for _ in range(n)]
        ku = [float(rng.uniform(1, 2.5)) for _ in range(n)]
        params = IntervalModelParams(n, kd, ku, 100.0)
        payoff = PiecewisePayoff.call(float(rng.uniform(60, 140)))
        lat = price_recursive(params, payoff)
        if not _close(lat.root_value, tr.brute_force_superhedge(tr.binomial_tree(100.0, kd, ku), payoff)):
            fails["interval"] += 1
    _emit([f"seed: {args.seed}", f"cases: {args.trees}"]
          + [f"{k}: {'pass' if v == 0 else f'FAIL ({v})'}" for k, v in fails.items()])
    return EXIT_OK if not any(fails.values()) else EXIT_ERROR


def _close(a: float, b: float, tol: float = 1e-9) -> bool:
    if a == b:
        return True
    return abs(a - b) <= tol * max(1.0, abs(b))


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="superhedge", description="Super-hedging prices by convex duality.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze-tree", help="arbitrage verdicts and price process of a scenario tree")
    a.add_argument("tree")
    a.add_argument("--payoff", help="call:K, put:K, linear:a,b or zero (default zero)")
    a.set_defaults(func=cmd_analyze_tree)

    def model_flags(q):
        q.add_argument("--config", help=f"key=value file (default ${CONFIG_ENV})")
        q.add_argument("--S0", "--s0", dest="S0", type=float)
        q.add_argument("--n", type=int)
        q.add_argument("--k-d", dest="k_d")
        q.add_argument("--k-u", dest="k_u")
        q.add_argument("--sigma")
        q.add_argument("--T", "--maturity", dest="T", type=float)
        q.add_argument("--dt", type=float)

    pr = sub.add_parser("price", help="interval-model price and lattice")
    model_flags(pr)
    pr.add_argument("--payoff")
    pr.add_argument("--strike")
    pr.add_argument("--lattice", help="write the lattice TSV here")
    pr.add_argument("--bs-check", action="store_true", help="compare with the Black-Scholes value")
    pr.add_argument("--exact", action="store_true", help="also price in rational arithmetic")
    pr.set_defaults(func=cmd_price)

    def series_flags(q):
        q.add_argument("csv")
        q.add_argument("--config", help=f"key=value file (default ${CONFIG_ENV})")
        q.add_argument("--estimator", choices=["symmetric", "asymmetric"])
        q.add_argument("--window", type=int)
        q.add_argument("--n", type=int, help="steps per episode")
        q.add_argument("--dt", type=float)
        q.add_argument("--pooled", action="store_const", const=True)
        q.add_argument("--mode", choices=["week", "chunk"])

    c = sub.add_parser("calibrate", help="estimate multipliers on the latest window")
    series_flags(c)
    c.set_defaults(func=cmd_calibrate)

    b = sub.add_parser("backtest", help="rolling super-hedging backtest")
    series_flags(b)
    b.add_argument("--strike", help="fixed strike or 'atm'")
    b.add_argument("--option", choices=["call", "put"])
    b.add_argument("--jobs", type=int)
    b.add_argument("--episodes-out", dest="episodes_out")
    b.add_argument("--histogram-out", dest="histogram_out")
    b.add_argument("--bins", type=int)
    b.set_defaults(func=cmd_backtest)

    s = sub.add_parser("selftest", help="seeded oracle cross-checks")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trees", type=int, default=50)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AIPViolation as exc:
        print(f"error: AIP violation: {exc}", file=sys.stderr)
        return EXIT_AIP
    except cal.InsufficientDataError as exc:
        print(f"error: insufficient data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (tr.TreeFormatError, cal.DataFormatError, ConfigError, PayoffSpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

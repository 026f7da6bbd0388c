"""Command-line entry point.

Subcommands: ``price``, ``ladder``, ``decompose``, ``verify``,
``fuzz-lemmas``, ``sweep``.  Exit codes: 0 success, 1 failed verification
check, 2 configuration error, 3 numerical failure.  The work-pool size is
capped by the ``ENDOWRISK_THREADS`` environment variable; all outputs are
byte-identical for a fixed configuration and seed regardless of the pool.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
from pathlib import Path

from . import config as config_mod
from .bonds import bond_price
from .checks import format_summary, run_suite, write_reports_csv
from .config import RunConfig
from .errors import ConfigError, EndowriskError, GridRangeError, NumericalError
from .inequalities import run_all_fuzzers
from .parallel import map_tasks
from .pricing import (beta, gamma_ladder, phi_alpha0, phi_portfolio,
                      rate_bound_constants, risk_decomposition)

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


def _out_dir(cfg: RunConfig | None, override: str | None) -> Path:
    if override is not None:
        path = Path(override)
    elif cfg is not None and cfg.output_dir is not None:
        path = cfg.output_dir
    else:
        path = Path("reports")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--scenario", help="preset name (default, deterministic)")
    parser.add_argument("--seed", type=int, help="override the Monte Carlo seed")
    parser.add_argument("--out", help="output directory for CSV artifacts")


def _load(args) -> RunConfig:
    cfg = config_mod.load(args.config, args.scenario)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def cmd_price(args) -> int:
    cfg = _load(args)
    r = cfg.eval_r if args.r is None else args.r
    lam = cfg.eval_lambda if args.lam is None else args.lam
    t = cfg.eval_t if args.t is None else args.t
    n = args.n
    problem = cfg.problem()
    ladder = phi_portfolio(problem, n, keep=[1, n])
    value = bond_price(cfg.bond, r, t, cfg.horizon).value
    price_n = value * ladder.phi(n).value_at(lam, t)
    hedge = ladder.phi(1).value_at(lam, t)
    floor = cfg.hazard.lambda_floor
    envelope = (n * value
                * math.exp(-(floor - cfg.alpha * math.sqrt(floor))
                           * (cfg.horizon - t)))
    print(f"price P^({n})(r={r:g}, lambda={lam:g}, t={t:g}) = {price_n:.10f}")
    print(f"hedge ratio (bonds per contract)              = {hedge:.10f}")
    print(f"upper envelope n * F * exp(-rate * (T - t))   = {envelope:.10f}")
    out = _out_dir(cfg, args.out)
    _write_csv(out / "price.csv", "r,lambda,t,n,price,hedge_ratio,envelope",
               [(r, lam, t, n, price_n, hedge, envelope)])
    return EXIT_OK


def cmd_ladder(args) -> int:
    cfg = _load(args)
    problem = cfg.problem()
    lam, t = cfg.eval_lambda, cfg.eval_t
    floor = cfg.hazard.lambda_floor
    beta_val = beta(problem).value_at(lam, t)
    zetas: dict[int, float] = {}
    gammas: dict[int, float] = {}
    phi_portfolio(problem, args.n_max, keep=[args.n_max],
                  on_level=lambda n, s: zetas.__setitem__(
                      n, s.value_at(lam, t) / n))
    gamma_ladder(problem, args.n_max, keep=[args.n_max],
                 on_level=lambda n, s: gammas.__setitem__(
                     n, s.value_at(lam, t) / n))
    rows = []
    for n in range(1, args.n_max + 1):
        bound = rate_bound_constants(floor, cfg.alpha, n).bound
        rows.append((n, zetas[n], gammas[n], beta_val, bound))
    out = _out_dir(cfg, args.out)
    _write_csv(out / "ladder.csv", "n,zeta,gamma_per_risk,beta,rate_bound", rows)
    print(f"n_max={args.n_max} at (lambda={lam:g}, t={t:g}); beta={beta_val:.8f}")
    for n, z, g, b, bound in rows:
        print(f"  n={n:4d}  zeta={z:.8f}  gamma/n={g:.8f}  "
              f"gap_bound={bound:.6f}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    cfg = _load(args)
    problem = cfg.problem()
    n = args.n
    ladder = phi_portfolio(problem, n, keep=[n])
    rd = risk_decomposition(problem, ladder, beta(problem),
                            phi_alpha0(problem), n, cfg.eval_r,
                            cfg.eval_lambda, cfg.eval_t)
    print(f"per-risk price (n={n})         = {rd.per_risk_price:.10f}")
    print(f"risk-neutral price             = {rd.risk_neutral:.10f}")
    print(f"finite-portfolio charge        = {rd.finite_portfolio_charge:.10f}")
    print(f"stochastic-mortality charge    = {rd.stochastic_mortality_charge:.10f}")
    print(f"total risk charge (identity)   = {rd.total_charge:.10f}")
    out = _out_dir(cfg, args.out)
    _write_csv(out / "decompose.csv",
               "n,per_risk_price,risk_neutral,finite_portfolio_charge,"
               "stochastic_mortality_charge,total_charge",
               [(n, rd.per_risk_price, rd.risk_neutral,
                 rd.finite_portfolio_charge, rd.stochastic_mortality_charge,
                 rd.total_charge)])
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load(args)
    started = time.perf_counter()
    reports = run_suite(cfg, fuzz_samples=args.fuzz_samples)
    out = _out_dir(cfg, args.out)
    write_reports_csv(reports, out / "checks.csv")
    print(format_summary(reports))
    print(f"total wall time: {time.perf_counter() - started:.1f}s; "
          f"report: {out / 'checks.csv'}")
    if not all(r.passed for r in reports):
        return EXIT_CHECK_FAILURE
    return EXIT_OK


def cmd_fuzz_lemmas(args) -> int:
    results = run_all_fuzzers(args.seed, args.samples)
    check_ids = ("lem_4_5_sqrt_shift", "lem_4_10_subadditive_split",
                 "lem_4_12_per_risk_split")
    ok = True
    rows = []
    for check_id, res in zip(check_ids, results):
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {check_id}: {res.n_samples} samples, "
              f"worst margin {res.worst_margin:.3e}, "
              f"violations {res.violations}")
        rows.append((check_id, res.n_samples, res.worst_margin, res.violations))
        ok = ok and res.passed
    if args.out is not None:
        out = _out_dir(None, args.out)
        _write_csv(out / "fuzz.csv", "check,samples,worst_margin,violations",
                   rows)
    return EXIT_OK if ok else EXIT_CHECK_FAILURE


def cmd_sweep(args) -> int:
    cfg = _load(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values must be comma-separated numbers: {exc}")
    if not values:
        raise ConfigError("--values must not be empty")
    if args.param != "alpha":
        raise ConfigError(f"unsupported sweep parameter {args.param!r} "
                          "(supported: alpha)")
    results: dict[float, tuple[float, float]] = {}

    def run(value: float) -> None:
        problem = dataclasses.replace(cfg.problem(), alpha=value)
        ladder = phi_portfolio(problem, args.n, keep=[args.n])
        phi_n = ladder.phi(args.n).value_at(cfg.eval_lambda, cfg.eval_t)
        f = bond_price(cfg.bond, cfg.eval_r, cfg.eval_t, cfg.horizon).value
        results[value] = (phi_n, f * phi_n)

    map_tasks(run, values)
    rows = [(v, results[v][0], results[v][1]) for v in values]
    out = _out_dir(cfg, args.out)
    _write_csv(out / "sweep.csv", f"alpha,phi_n{args.n},price_n{args.n}", rows)
    for v, phi_n, price_n in rows:
        print(f"alpha={v:g}  phi^({args.n})={phi_n:.8f}  "
              f"P^({args.n})={price_n:.8f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="endowrisk",
        description="Risk-adjusted pure-endowment pricing and verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="price n contracts at a query point")
    _add_common(p)
    p.add_argument("--r", type=float, help="short rate (default: scenario)")
    p.add_argument("--lam", "--lambda", dest="lam", type=float,
                   help="hazard rate (default: scenario)")
    p.add_argument("--t", type=float, help="valuation time (default: scenario)")
    p.add_argument("--n", type=int, default=1, help="number of contracts")
    p.set_defaults(fn=cmd_price)

    p = sub.add_parser("ladder", help="per-risk diversification curve")
    _add_common(p)
    p.add_argument("--n-max", type=int, default=10)
    p.set_defaults(fn=cmd_ladder)

    p = sub.add_parser("decompose", help="risk-charge decomposition")
    _add_common(p)
    p.add_argument("--n", type=int, default=1)
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("verify", help="run the full property suite")
    _add_common(p)
    p.add_argument("--fuzz-samples", type=int, default=100_000)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("fuzz-lemmas", help="fuzz the square-root inequalities")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--out", help="output directory for CSV artifacts")
    p.set_defaults(fn=cmd_fuzz_lemmas)

    p = sub.add_parser("sweep", help="price across a parameter grid")
    _add_common(p)
    p.add_argument("--param", default="alpha")
    p.add_argument("--values", required=True,
                   help="comma-separated parameter values")
    p.add_argument("--n", type=int, default=1)
    p.set_defaults(fn=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, GridRangeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_FAILURE
    except EndowriskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_FAILURE


if __name__ == "__main__":
    sys.exit(main())

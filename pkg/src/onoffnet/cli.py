"""Command-line front end. Every subcommand is a thin adapter over the library.

Exit codes: 0 ok, 2 invalid arguments or configuration, 3 numerical failure,
4 I/O failure. Override precedence: command-line flag > config file > default.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bounds, harness
from .config import CONFIG_KEYS, ConfigError, NetworkConfig, config_from_mapping, load_config
from .metrics import AVERAGE, GUARANTEED, DenseLimitError, InsufficientSamples, average_sum_rate, guaranteed_sum_rate
from .power import ASYMPTOTIC, EXACT, FIXED_POINT, FULL, PowerStrategy, solve_threshold

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

STRATEGY_CHOICES = (harness.AUTO, EXACT, ASYMPTOTIC, FIXED_POINT, FULL)

# flag name -> config key
OVERRIDES = {
    "k": "k",
    "m": "m",
    "bandwidth_w": "bandwidth_w",
    "noise_n0": "noise_n0",
    "alpha": "alpha",
    "shadow_kind": "shadow.kind",
    "varpi": "shadow.mean",
    "shadow_variance": "shadow.variance",
    "shadow_beta_min": "shadow.beta_min",
    "shadow_beta_max": "shadow.beta_max",
    "seed": "seed",
}
assert set(OVERRIDES.values()) == set(CONFIG_KEYS)

ESTIMATE_HEADER = ("k", "m", "alpha", "varpi", "w", "n0", "seed", "kind", "tau", "method", "metric", "eps",
                   "mean", "stderr", "trials", "predictor")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("network configuration")
    g.add_argument("--config", type=Path, help="flat 'key = value' config file")
    g.add_argument("--k", help="number of links K")
    g.add_argument("--m", help="number of clusters M (must divide K)")
    g.add_argument("--bandwidth-w", "--w", dest="bandwidth_w", help="total bandwidth W")
    g.add_argument("--noise-n0", "--n0", dest="noise_n0", help="noise density N0")
    g.add_argument("--alpha", help="cross-link connection probability")
    g.add_argument("--shadow-kind", choices=("constant", "uniform", "lognormal"))
    g.add_argument("--varpi", "--shadow-mean", dest="varpi", help="mean shadowing factor")
    g.add_argument("--shadow-variance")
    g.add_argument("--shadow-beta-min")
    g.add_argument("--shadow-beta-max")
    g.add_argument("--seed", help="base seed of every random stream")
    p.add_argument("--output", "-o", type=Path, help="CSV destination (default stdout)")
    p.add_argument("--threads", type=int, default=1, help="worker threads; never changes the output")


def _add_trials(p, eps: bool = True) -> None:
    p.add_argument("--trials", type=int, help="Monte Carlo trials (default depends on K)")
    if eps:
        p.add_argument("--eps", type=float, default=0.05, help="outage tolerance of the guaranteed metric")


def _add_strategy(p) -> None:
    p.add_argument("--strategy", default=harness.AUTO, choices=STRATEGY_CHOICES,
                   help="threshold solver, full power, or auto (exact, full power when alpha_hat = 0)")
    p.add_argument("--tau", type=float, help="fixed on-off threshold (overrides --strategy)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="onoffnet", description="On-off power allocation in clustered interference networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="one sum-rate estimate")
    _add_common(p)
    _add_trials(p)
    _add_strategy(p)
    p.add_argument("--metric", choices=(AVERAGE, GUARANTEED), default=AVERAGE)

    for name, axis in (("sweep-m", "M"), ("sweep-k", "K")):
        p = sub.add_parser(name, help=f"sum-rate versus {axis}")
        _add_common(p)
        _add_trials(p)
        _add_strategy(p)
        p.add_argument("--metric", choices=(AVERAGE, GUARANTEED), default=AVERAGE)
        p.add_argument("--values", type=_int_list,
                       help="comma-separated axis values" + (" (default: all divisors of K)" if axis == "M" else ""))
        p.add_argument("--plot-data", type=Path, help="also write axis,mean,stderr data with provenance header")
        p.set_defaults(axis=axis)

    p = sub.add_parser("threshold", help="on-off threshold from a solver")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha-hat", type=float, required=True)
    p.add_argument("--method", choices=(ASYMPTOTIC, EXACT, FIXED_POINT), default=EXACT)
    p.add_argument("--output", "-o", type=Path)

    p = sub.add_parser("analyze", help="closed forms and bounds for a configuration")
    _add_common(p)
    p.add_argument("--c", type=float, default=2.0, help="constant of the moderate/weak bound (> 1)")
    p.add_argument("--eps-conc", type=float, help="concentration slack of the guaranteed lower bound")
    p.add_argument("--gamma-clusters", type=int, help="single-link clusters Gamma for the Theta(K) bound")

    p = sub.add_parser("compare", help="strategies on common random numbers")
    _add_common(p)
    _add_trials(p)
    p.add_argument("--strategies", default="exact,full",
                   help="comma-separated from " + ",".join(STRATEGY_CHOICES) + " or tau=<value>")
    p.add_argument("--metric", choices=(AVERAGE, GUARANTEED), default=AVERAGE)

    p = sub.add_parser("concentration", help="interference concentration diagnostic")
    _add_common(p)
    _add_trials(p, eps=False)
    _add_strategy(p)
    p.add_argument("--rel-dev", type=float, default=0.2)

    p = sub.add_parser("guaranteed", help="guaranteed sum-rate against its bounds")
    _add_common(p)
    _add_trials(p)
    p.add_argument("--eps-conc", type=float, help="concentration slack (default (n q)^(-3/8))")
    return parser


def resolve_config(args) -> NetworkConfig:
    base = load_config(args.config) if args.config else NetworkConfig()
    overrides = {OVERRIDES[a]: v for a in OVERRIDES if (v := getattr(args, a, None)) is not None}
    return config_from_mapping(overrides, base) if overrides else base


def _strategy(args, config):
    if getattr(args, "tau", None) is not None:
        return PowerStrategy.custom(args.tau)
    return harness.resolve_strategy(config, args.strategy)


def _parse_strategy_token(token: str, config):
    token = token.strip()
    if token.startswith("tau="):
        return PowerStrategy.custom(float(token[4:]))
    if token not in STRATEGY_CHOICES:
        raise UsageError(f"unknown strategy {token!r}")
    return harness.resolve_strategy(config, token)


def _estimate_row(config, strategy, est, metric, eps, pred):
    return [config.K, config.M, config.alpha, config.shadowing.mean, config.W, config.N0, config.seed,
            strategy.kind, strategy.tau, strategy.method, metric, eps if metric == GUARANTEED else None,
            est.mean, est.stderr, est.trials, pred]


def cmd_simulate(args) -> str:
    config = resolve_config(args)
    strategy = _strategy(args, config)
    trials = args.trials or harness.default_trials(config.K)
    est = harness.estimate(config, strategy, args.metric, trials, args.eps, args.threads)
    pred = harness.predictor(config, args.metric)
    return harness.csv_text(ESTIMATE_HEADER, [_estimate_row(config, strategy, est, args.metric, args.eps, pred)])


def sweep_spec(args) -> harness.SweepSpec:
    config = resolve_config(args)
    strategy = PowerStrategy.custom(args.tau) if args.tau is not None else args.strategy
    values = args.values
    if values is None:
        if args.axis == "M":
            values = [d for d in range(1, config.K + 1) if config.K % d == 0]
        else:
            values = [100, 1000, 10000]
    return harness.SweepSpec(config, args.axis, tuple(values), strategy, args.metric, args.trials, args.eps)


def cmd_sweep(args) -> str:
    spec = sweep_spec(args)
    result = harness.run_sweep(spec, args.threads)
    if args.plot_data:
        emit_plot_data(result, args.plot_data)
    return result.to_csv()


def emit_plot_data(result: harness.SweepResult, path) -> None:
    """axis,mean,stderr rows preceded by ``# key = value`` provenance comments."""
    rows = [r for r in result.rows if r.ok]
    if not rows:
        raise ValueError("sweep result has no successful points")
    spec = result.spec
    lines = [f"# {k} = {v}" for k, v in spec.base.to_dict().items()]
    lines += [f"# axis = {spec.axis}", f"# strategy = {_describe(spec.strategy)}", f"# metric = {spec.metric}"]
    if spec.metric == GUARANTEED:
        lines.append(f"# eps = {harness.format_value(spec.eps)}")
    body = harness.csv_text((spec.axis, "mean", "stderr"),
                            ((r.value, r.estimate.mean, r.estimate.stderr) for r in rows))
    Path(path).write_text("\n".join(lines) + "\n" + body)


def _describe(strategy) -> str:
    return strategy.label if isinstance(strategy, PowerStrategy) else str(strategy)


def cmd_threshold(args) -> str:
    if args.n < 3:
        raise UsageError("--n must be at least 3")
    if not 0 < args.alpha_hat <= 1:
        raise UsageError("--alpha-hat must lie in (0, 1]")
    sol = solve_threshold(args.method, args.n, args.alpha_hat)
    return harness.csv_text(("n", "alpha_hat", "method", "tau", "q", "objective_value"),
                            [[args.n, args.alpha_hat, sol.method, sol.tau, sol.q, sol.objective_value]])


def analyze_reports(config: NetworkConfig, c: float = 2.0, eps_conc=None, gamma_clusters=None) -> list:
    """BoundReports that apply to ``config``."""
    K, M, n, W, N0, ah = config.K, config.M, config.n, config.W, config.N0, config.alpha_hat
    base = dict(K=K, M=M, W=W, N0=N0, alpha_hat=ah)
    reports = [bounds.BoundReport("alpha-zero-closed-form", bounds.closed_form_alpha0(K, M, W, N0),
                                  bounds.ALPHA_ZERO, base)]
    if K >= 2:
        exact, asym = bounds.closed_form_M_equals_K(K, W, N0)
        reports.append(bounds.BoundReport("m-equals-k-exact", exact, bounds.M_EQUALS_K, base))
        reports.append(bounds.BoundReport("m-equals-k-asymptote", asym, bounds.M_EQUALS_K, base))
    if n >= 3 and ah > 0:
        sol = solve_threshold(EXACT, n, ah, W, M)
        reports.append(bounds.BoundReport("average-asymptote", bounds.avg_sum_rate_asymptote(K, M, ah, W),
                                          bounds.classify_regime(n, sol.q, ah), base))
        reports.append(bounds.bound_moderate_weak(n, sol.q, M, c, N0, ah, W))
        g = bounds.guaranteed_bounds(K, M, ah, W, N0, sol.tau, eps_conc)
        info = {**base, "tau": sol.tau, "eps_conc": g.eps_conc}
        reports.append(bounds.BoundReport("guaranteed-lower", g.lower, bounds.GUARANTEED_LOWER, info))
        reports.append(bounds.BoundReport("guaranteed-lower-linearized", g.lower_linearized, bounds.GUARANTEED_LOWER, info))
        reports.append(bounds.BoundReport("guaranteed-upper", g.upper, bounds.GUARANTEED_UPPER, info))
    if gamma_clusters is not None:
        reports.append(bounds.bound_theta_K(M, gamma_clusters, n, K, W, N0, config.alpha))
    return reports


def cmd_analyze(args) -> str:
    config = resolve_config(args)
    reports = analyze_reports(config, args.c, args.eps_conc, args.gamma_clusters)
    return harness.csv_text(("name", "value", "regime", "inputs"),
                            ([r.name, r.value, r.regime,
                              ";".join(f"{k}={harness.format_value(v)}" for k, v in r.inputs.items())]
                             for r in reports))


def cmd_compare(args) -> str:
    config = resolve_config(args)
    strategies = [_parse_strategy_token(t, config) for t in args.strategies.split(",") if t.strip()]
    trials = args.trials or harness.default_trials(config.K)
    results = harness.compare_strategies(config, strategies, trials, args.threads, metric=args.metric, eps=args.eps)
    pred = harness.predictor(config, args.metric)
    first = results[0][1]
    rows = []
    for s, est in results:
        diff, dse = harness.paired_difference(est, first)
        rows.append(_estimate_row(config, s, est, args.metric, args.eps, pred) + [diff, dse])
    return harness.csv_text(ESTIMATE_HEADER + ("diff_vs_first", "diff_stderr"), rows)


def cmd_concentration(args) -> str:
    config = resolve_config(args)
    strategy = _strategy(args, config)
    trials = args.trials or 500
    rep = harness.concentration_suite(config, strategy, trials, args.rel_dev, args.threads)
    return harness.csv_text(("k", "m", "alpha_hat", "tau", "rel_dev", "trials", "mu_n", "mean_interference",
                             "pairs", "exceedance", "degenerate"),
                            [[config.K, config.M, config.alpha_hat, strategy.tau, args.rel_dev, trials, rep.mu_n,
                              rep.mean_interference, rep.pairs, rep.exceedance, rep.degenerate]])


def cmd_guaranteed(args) -> str:
    config = resolve_config(args)
    if config.alpha_hat == 0:
        raise ConfigError("guaranteed bounds need alpha_hat > 0")
    strategy = harness.resolve_strategy(config, EXACT)
    trials = args.trials or harness.default_trials(config.K)
    g = guaranteed_sum_rate(config, strategy, args.eps, trials, args.threads)
    a = average_sum_rate(config, strategy, trials, args.threads)
    b = bounds.guaranteed_bounds(config.K, config.M, config.alpha_hat, config.W, config.N0, strategy.tau, args.eps_conc)
    return harness.csv_text(("k", "m", "alpha_hat", "tau", "eps", "trials", "guaranteed", "guaranteed_stderr",
                             "average", "average_stderr", "lower", "lower_linearized", "upper", "eps_conc"),
                            [[config.K, config.M, config.alpha_hat, strategy.tau, args.eps, trials, g.mean, g.stderr,
                              a.mean, a.stderr, b.lower, b.lower_linearized, b.upper, b.eps_conc]])


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep-m": cmd_sweep,
    "sweep-k": cmd_sweep,
    "threshold": cmd_threshold,
    "analyze": cmd_analyze,
    "compare": cmd_compare,
    "concentration": cmd_concentration,
    "guaranteed": cmd_guaranteed,
}


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command != "threshold":
            resolve_config(args)  # validate overrides before any work
        text = COMMANDS[args.command](args)
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, InsufficientSamples, DenseLimitError, harness.NoActiveLinks, ValueError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

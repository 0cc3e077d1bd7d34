"""Seeded Monte Carlo experiments: parameter sweeps, strategy comparisons, diagnostics.

Sweep point ``i`` uses stream ``i`` of the base seed, so a point's estimate
does not depend on which other points are in the sweep or on thread count.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import bounds
from .config import ConfigError, NetworkConfig, ShadowingModel
from .metrics import (AVERAGE, GUARANTEED, SumRateEstimate, average_sum_rate, guaranteed_sum_rate,
                      interference_samples)
from .power import (EXACT, FULL, GRID, METHODS, PowerStrategy, ThresholdSolution, grid_maximizer,
                    solve_threshold)

AXIS_M = "M"
AXIS_K = "K"
AXIS_ALPHA = "alpha"
AXIS_VARPI = "varpi"
AXES = (AXIS_M, AXIS_K, AXIS_ALPHA, AXIS_VARPI)

AUTO = "auto"
FULL_POWER_MAX_N = 1000


class NoActiveLinks(RuntimeError):
    pass


def default_trials(K: int) -> int:
    if K <= 1000:
        return 20_000
    if K <= 10_000:
        return 2_000
    return 200


def format_value(x) -> str:
    """CSV cell: 10 significant digits for reals, empty for missing."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.10g}"
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- strategies

def resolve_threshold(method: str, n: int, alpha_hat: float, W: float = 1.0, M: int = 1) -> ThresholdSolution:
    """Threshold for a cluster of n links, extended to the corners the solvers exclude.

    Without interference (alpha_hat = 0) every link should transmit, so tau = 0.
    A single link has no one to interfere with: tau = 0. For n = 2 the utility
    is maximized by grid search on [0.1, log 2].
    """
    if method not in METHODS:
        raise ValueError(f"unknown threshold method {method!r}; expected one of {METHODS}")
    if alpha_hat == 0 or n == 1:
        return ThresholdSolution.build(0.0, method, math.nan)
    if n == 2:
        tau = grid_maximizer(2, alpha_hat)
        return ThresholdSolution.build(tau, GRID, math.nan)
    return solve_threshold(method, n, alpha_hat, W, M)


def resolve_strategy(config: NetworkConfig, strategy) -> PowerStrategy:
    """Accept a PowerStrategy, a threshold method name, ``full`` or ``auto``."""
    if isinstance(strategy, PowerStrategy):
        return strategy
    if strategy == FULL:
        return PowerStrategy.full_power()
    if strategy == AUTO:
        if config.alpha_hat == 0:
            return PowerStrategy.full_power()
        strategy = EXACT
    sol = resolve_threshold(strategy, config.n, config.alpha_hat, config.W, config.M)
    return PowerStrategy.on_off(sol)


def _check_dense(config: NetworkConfig, strategy: PowerStrategy) -> None:
    if strategy.kind == FULL and config.alpha > 0 and config.n > FULL_POWER_MAX_N:
        raise ValueError(f"full power with n={config.n} > {FULL_POWER_MAX_N} links per cluster is not supported")


def predictor(config: NetworkConfig, metric: str = AVERAGE) -> float:
    """Analytic reference for a sweep point (nan when none applies)."""
    # with one link per cluster or no cross links there is no interference;
    # at M = K this is the exact W e^{a} E1(a) form
    if config.alpha == 0 or config.n == 1:
        return bounds.closed_form_alpha0(config.K, config.M, config.W, config.N0)
    if metric == GUARANTEED:
        return config.W / config.alpha_hat * math.log(config.K)
    if config.n >= 3:
        return bounds.avg_sum_rate_asymptote(config.K, config.M, config.alpha_hat, config.W)
    return math.nan


def estimate(config: NetworkConfig, strategy: PowerStrategy, metric: str, trials: int, eps: float = 0.05,
             threads: int = 1, stream: int = 0) -> SumRateEstimate:
    _check_dense(config, strategy)
    if metric == AVERAGE:
        return average_sum_rate(config, strategy, trials, threads, stream)
    if metric == GUARANTEED:
        return guaranteed_sum_rate(config, strategy, eps, trials, threads, stream)
    raise ValueError(f"unknown metric {metric!r}")


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepSpec:
    base: NetworkConfig
    axis: str
    values: tuple
    strategy: object = AUTO  # PowerStrategy, threshold method name, "full" or "auto"
    metric: str = AVERAGE
    trials: int | None = None
    eps: float = 0.05

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; expected one of {AXES}")
        object.__setattr__(self, "values", tuple(self.values))
        if self.axis == AXIS_M:
            bad = [m for m in self.values if int(m) != m or m < 1 or self.base.K % int(m)]
            if bad:
                raise ConfigError(f"M must divide K (K mod M = 0); K={self.base.K}, offending M: {bad}")
        elif self.axis == AXIS_K:
            bad = [k for k in self.values if int(k) != k or k < 1 or int(k) % self.base.M]
            if bad:
                raise ConfigError(f"K values must be positive multiples of M={self.base.M} (K mod M = 0); offending: {bad}")
        if self.metric not in (AVERAGE, GUARANTEED):
            raise ConfigError(f"unknown metric {self.metric!r}")
        if self.trials is not None and self.trials < 2:
            raise ConfigError("trials must be at least 2")

    def point_config(self, value) -> NetworkConfig:
        if self.axis == AXIS_M:
            return self.base.with_(M=int(value))
        if self.axis == AXIS_K:
            return self.base.with_(K=int(value))
        if self.axis == AXIS_ALPHA:
            return self.base.with_(alpha=float(value))
        s = self.base.shadowing
        if s.kind == "constant":
            shadowing = ShadowingModel.constant(float(value))
        elif s.kind == "uniform":
            half = 0.5 * (s.beta_max - s.beta_min)
            shadowing = ShadowingModel.uniform(float(value) - half, float(value) + half)
        else:
            shadowing = ShadowingModel.lognormal(float(value), s.variance, s.beta_min, s.beta_max)
        return self.base.with_(shadowing=shadowing)


@dataclass(frozen=True)
class SweepRow:
    value: float
    config: NetworkConfig
    strategy: PowerStrategy | None
    estimate: SumRateEstimate | None
    predictor: float
    ratio: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: list = field(default_factory=list)

    def means(self) -> np.ndarray:
        return np.array([r.estimate.mean if r.ok else np.nan for r in self.rows])

    def stderrs(self) -> np.ndarray:
        return np.array([r.estimate.stderr if r.ok else np.nan for r in self.rows])

    HEADER = ("axis", "value", "k", "m", "alpha", "varpi", "w", "n0", "seed", "kind", "tau", "method",
              "metric", "eps", "mean", "stderr", "trials", "predictor", "ratio", "error")

    def to_csv(self) -> str:
        return csv_text(self.HEADER, (_row_cells(self.spec, r) for r in self.rows))


def _row_cells(spec: SweepSpec, r: SweepRow) -> list:
    c = r.config
    s = r.strategy
    e = r.estimate
    return [spec.axis, r.value, c.K, c.M, c.alpha, c.shadowing.mean, c.W, c.N0, c.seed,
            s.kind if s else None, s.tau if s else None, s.method if s else None,
            spec.metric, spec.eps if spec.metric == GUARANTEED else None,
            e.mean if e else None, e.stderr if e else None, e.trials if e else None,
            r.predictor, r.ratio, r.error]


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """One estimate per axis value; a failing point is recorded with its error."""
    rows = []
    order = sorted(range(len(spec.values)), key=lambda i: spec.values[i])
    for i in order:
        value = spec.values[i]
        strategy = None
        try:
            config = spec.point_config(value)
        except ValueError as exc:
            rows.append(SweepRow(value, spec.base, None, None, math.nan, math.nan, str(exc)))
            continue
        try:
            strategy = resolve_strategy(config, spec.strategy)
            trials = spec.trials or default_trials(config.K)
            est = estimate(config, strategy, spec.metric, trials, spec.eps, threads, stream=i)
        except (ValueError, ArithmeticError, MemoryError) as exc:
            rows.append(SweepRow(value, config, strategy, None, math.nan, math.nan, f"{type(exc).__name__}: {exc}"))
            continue
        pred = predictor(config, spec.metric)
        ratio = est.mean / pred if pred > 0 else math.nan
        rows.append(SweepRow(value, config, strategy, est, pred, ratio))
    return SweepResult(spec, rows)


# ---------------------------------------------------------------- comparisons

def compare_strategies(config: NetworkConfig, strategies: Sequence, trials: int, threads: int = 1,
                       stream: int = 0, metric: str = AVERAGE, eps: float = 0.05):
    """Estimates for each strategy on common random numbers (same substreams)."""
    if len(strategies) < 2:
        raise ValueError("need at least two strategies")
    out = []
    for s in strategies:
        s = resolve_strategy(config, s)
        out.append((s, estimate(config, s, metric, trials, eps, threads, stream)))
    return out


def paired_difference(a: SumRateEstimate, b: SumRateEstimate) -> tuple[float, float]:
    """Mean and stderr of the per-trial difference a - b (requires common random numbers)."""
    d = a.totals - b.totals
    return float(d.mean()), float(d.std(ddof=1) / math.sqrt(d.size))


def empirical_threshold(config: NetworkConfig, taus: Sequence[float], trials: int, threads: int = 1,
                        stream: int = 0) -> tuple[float, list]:
    """Simulation-optimal threshold among ``taus`` under common random numbers."""
    ests = [average_sum_rate(config, PowerStrategy.custom(t), trials, threads, stream) for t in taus]
    best = int(np.argmax([e.mean for e in ests]))
    return float(taus[best]), ests


# ---------------------------------------------------------------- diagnostics

@dataclass(frozen=True)
class ConcentrationReport:
    exceedance: float
    mu_n: float
    pairs: int
    mean_interference: float
    degenerate: bool = False


def concentration_suite(config: NetworkConfig, strategy, trials: int, rel_dev: float = 0.2,
                        threads: int = 1, stream: int = 0) -> ConcentrationReport:
    """Fraction of (trial, active link) pairs with |I - mu_n| > rel_dev * mu_n.

    ``mu_n = (n - 1) alpha_hat q`` with q the activation probability of the
    strategy. Without cross links (alpha_hat = 0) the report is flagged
    degenerate and the exceedance is nan.
    """
    if not rel_dev > 0:
        raise ValueError("rel_dev must be positive")
    strategy = resolve_strategy(config, strategy)
    _check_dense(config, strategy)
    q = 1.0 if strategy.kind == FULL else math.exp(-strategy.tau)
    mu = (config.n - 1) * config.alpha_hat * q
    if mu == 0:
        return ConcentrationReport(math.nan, 0.0, 0, 0.0, True)
    per_trial = interference_samples(config, strategy, trials, threads, stream)
    if not any(len(x) >= 2 for x in per_trial):
        raise NoActiveLinks("no trial had two or more active links")
    pool = np.concatenate(per_trial)
    exceed = np.count_nonzero(np.abs(pool - mu) > rel_dev * mu)
    return ConcentrationReport(exceed / pool.size, mu, int(pool.size), float(pool.mean()))


@dataclass(frozen=True)
class ScalingRow:
    K: int
    estimate: SumRateEstimate
    reference: float
    ratio: float

    @property
    def deviation(self) -> float:
        return abs(self.ratio - 1.0)


def scaling_suite(K_list: Sequence[int], M: int = 1, alpha: float = 1.0, shadowing: ShadowingModel | None = None,
                  trials: int | None = None, method: str = EXACT, W: float = 1.0, N0: float = 1.0,
                  seed: int = 12345, threads: int = 1) -> list[ScalingRow]:
    """Average sum-rate against (W / alpha_hat) log K for increasing K."""
    K_list = [int(k) for k in K_list]
    if any(b <= a for a, b in zip(K_list, K_list[1:])):
        raise ValueError("K_list must be strictly increasing")
    shadowing = shadowing or ShadowingModel()
    rows = []
    for i, K in enumerate(K_list):
        config = NetworkConfig(K=K, M=M, W=W, N0=N0, alpha=alpha, shadowing=shadowing, seed=seed)
        strategy = resolve_strategy(config, method)
        est = average_sum_rate(config, strategy, trials or default_trials(K), threads, stream=i)
        ref = W / config.alpha_hat * math.log(K)
        rows.append(ScalingRow(K, est, ref, est.mean / ref))
    return rows


def scaling_csv(rows: Sequence[ScalingRow]) -> str:
    return csv_text(("k", "mean", "stderr", "trials", "reference", "ratio", "abs_dev"),
                    ((r.K, r.estimate.mean, r.estimate.stderr, r.estimate.trials, r.reference, r.ratio, r.deviation)
                     for r in rows))


__all__ = (
    "AXES", "AXIS_M", "AXIS_K", "AXIS_ALPHA", "AXIS_VARPI", "AUTO", "NoActiveLinks", "default_trials",
    "format_value", "csv_text", "resolve_threshold", "resolve_strategy", "predictor", "estimate",
    "SweepSpec", "SweepRow", "SweepResult", "run_sweep", "compare_strategies", "paired_difference",
    "empirical_threshold", "ConcentrationReport", "concentration_suite", "ScalingRow", "scaling_suite",
    "scaling_csv",
)

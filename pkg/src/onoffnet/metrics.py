"""Per-realization interference and rates, and Monte Carlo sum-rate estimators.

Every trial ``t`` draws from its own substream ``(config.seed, stream, t)``;
results are collected in trial order before any reduction, so estimates do
not depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, TypeVar

import numpy as np

from .channel import ChannelRealization, sample_cross_gains, substream
from .config import NetworkConfig
from .power import PowerStrategy

AVERAGE = "average"
GUARANTEED = "guaranteed"

# largest active set for which an m x m block of cross gains is drawn
MAX_ACTIVE_LINKS = 2000
MIN_QUANTILE_POOL = 100

T = TypeVar("T")


class InsufficientSamples(ValueError):
    pass


class DenseLimitError(MemoryError):
    pass


@dataclass(frozen=True)
class TrialOutcome:
    """One cluster in one realization.

    ``interference`` is only drawn for active receivers; inactive entries are
    0 because their rate is 0 whatever the interference.
    """

    powers: np.ndarray
    interference: np.ndarray
    rates: np.ndarray
    active_count: int


@dataclass(frozen=True)
class NetworkTrial:
    """All M clusters of one realization; arrays have shape (M, n)."""

    direct: np.ndarray
    powers: np.ndarray
    interference: np.ndarray
    rates: np.ndarray

    @property
    def sum_rate(self) -> float:
        return float(self.rates.sum())

    def cluster(self, j: int) -> TrialOutcome:
        p = self.powers[j]
        return TrialOutcome(p, self.interference[j], self.rates[j], int(np.count_nonzero(p > 0)))


@dataclass(frozen=True)
class SumRateEstimate:
    mean: float
    stderr: float
    trials: int
    metric: str = AVERAGE
    eps: float | None = None
    cluster_means: tuple[float, ...] = ()
    cluster_stderrs: tuple[float, ...] = ()
    totals: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False, compare=False)

    @classmethod
    def from_samples(cls, totals: np.ndarray, metric: str = AVERAGE, eps: float | None = None,
                     per_cluster: np.ndarray | None = None) -> "SumRateEstimate":
        totals = np.asarray(totals, dtype=float)
        trials = totals.size
        if trials < 2:
            raise ValueError("need at least 2 trials")
        mean, se = _mean_se(totals)
        cm: tuple[float, ...] = ()
        cs: tuple[float, ...] = ()
        if per_cluster is not None:
            stats = [_mean_se(col) for col in np.asarray(per_cluster).T]
            cm = tuple(s[0] for s in stats)
            cs = tuple(s[1] for s in stats)
        return cls(mean, se, trials, metric, eps, cm, cs, totals)


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


def combined_stderr(a: SumRateEstimate, b: SumRateEstimate) -> float:
    return math.hypot(a.stderr, b.stderr)


def link_rate(h, p, interference, W: float, M: int, N0: float):
    """Rate in nats/s: (W/M) log(1 + h p / (I + N0 W / M))."""
    if W <= 0 or M <= 0:
        raise ValueError("W and M must be positive")
    noise = N0 * W / M
    h, p, interference = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (h, p, interference)))
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = np.where(p > 0, h * p / (interference + noise), 0.0)
    out = (W / M) * np.log1p(snr)
    return float(out) if out.ndim == 0 else out


def interference_at(realization: ChannelRealization, powers, i: int) -> float:
    """I_i = sum_{k != i} L_ki p_k over the cluster."""
    powers = np.asarray(powers, dtype=float)
    if len(powers) != realization.n:
        raise ValueError("powers do not match the realization")
    if not 0 <= i < realization.n:
        raise IndexError(f"link {i} outside cluster of size {realization.n}")
    active = realization.active
    pos = np.searchsorted(active, i)
    if pos >= active.size or active[pos] != i:
        others = np.setdiff1d(np.flatnonzero(powers > 0), [i])
        if others.size == 0:
            return 0.0
        raise IndexError(f"cross gains into link {i} were not sampled")
    outside = np.setdiff1d(np.flatnonzero(powers > 0), active)
    if outside.size:
        raise ValueError("powers are positive outside the sampled active set")
    return float(realization.cross[:, pos] @ powers[active])


def simulate_trial(config: NetworkConfig, strategy: PowerStrategy, rng: np.random.Generator) -> NetworkTrial:
    """One realization of all M clusters.

    Direct gains for the whole network are drawn first so that different
    strategies driven by the same substream see identical direct gains.
    Cross gains are drawn only among transmitting links, cluster by cluster.
    """
    M, n = config.M, config.n
    direct = rng.standard_exponential((M, n))
    powers = strategy.powers(direct)
    interference = np.zeros((M, n))
    if config.alpha > 0 and n > 1:
        for j in range(M):
            active = np.flatnonzero(powers[j] > 0)
            m = active.size
            if m < 2:
                continue
            if m > MAX_ACTIVE_LINKS:
                raise DenseLimitError(f"{m} active links in one cluster exceeds the dense limit {MAX_ACTIVE_LINKS}")
            cross = sample_cross_gains(config.alpha, config.shadowing, rng, (m, m))
            np.fill_diagonal(cross, 0.0)
            interference[j, active] = powers[j, active] @ cross
    rates = link_rate(direct, powers, interference, config.W, config.M, config.N0)
    return NetworkTrial(direct, powers, interference, rates)


def run_trials(fn: Callable[[np.random.Generator, int], T], seed: int, stream: int, trials: int,
               threads: int = 1) -> list[T]:
    """Evaluate ``fn(rng_t, t)`` for every trial, returned in trial order."""

    def job(t: int) -> T:
        return fn(substream(seed, stream, t), t)

    if threads <= 1:
        return [job(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, range(trials)))


def _sum_rates(config, strategy, trials, threads, stream):
    def one(rng, _t):
        return simulate_trial(config, strategy, rng).rates.sum(axis=1)

    return np.array(run_trials(one, config.seed, stream, trials, threads))


def average_sum_rate(config: NetworkConfig, strategy: PowerStrategy, trials: int, threads: int = 1,
                     stream: int = 0) -> SumRateEstimate:
    """Monte Carlo network average sum-rate (all M clusters simulated)."""
    if trials < 2:
        raise ValueError("need at least 2 trials")
    per_cluster = _sum_rates(config, strategy, trials, threads, stream)
    return SumRateEstimate.from_samples(per_cluster.sum(axis=1), AVERAGE, per_cluster=per_cluster)


def _interference_records(config, strategy, samples, threads, stream):
    """Per trial: interference at every active receiver, and the matching (p, h)."""

    def one(rng, _t):
        trial = simulate_trial(config, strategy, rng)
        mask = trial.powers > 0
        return trial.interference[mask], trial.powers[mask], trial.direct[mask]

    return run_trials(one, config.seed, stream, samples, threads)


def _quantile(records, level: float) -> float:
    pool = np.concatenate([r[0] for r in records]) if records else np.empty(0)
    if pool.size < MIN_QUANTILE_POOL:
        raise InsufficientSamples(
            f"only {pool.size} interference values at active receivers; need {MIN_QUANTILE_POOL}")
    return float(np.quantile(np.sort(pool), level))


def interference_quantile(config: NetworkConfig, strategy: PowerStrategy, level: float, samples: int,
                          threads: int = 1, stream: int = 0) -> float:
    """Empirical ``level``-quantile of I_i over receivers whose own link is active."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if samples < 100:
        raise InsufficientSamples("need at least 100 realizations")
    return _quantile(_interference_records(config, strategy, samples, threads, stream), level)


def guaranteed_sum_rate(config: NetworkConfig, strategy: PowerStrategy, eps: float, samples: int,
                        threads: int = 1, stream: int = 0) -> SumRateEstimate:
    """eps-outage guaranteed sum-rate.

    Each active link is credited ``(W/M) log(1 + p h / (Q + N0 W/M))`` where
    ``Q`` is the (1-eps) quantile of the interference at active receivers.
    The quantile and the average over direct gains use the same realizations.
    """
    if not 0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 0.5]")
    if samples < 100:
        raise InsufficientSamples("need at least 100 realizations")
    records = _interference_records(config, strategy, samples, threads, stream)
    q = _quantile(records, 1.0 - eps)
    noise = config.noise
    totals = np.array([config.subband * np.log1p(p * h / (q + noise)).sum() for _, p, h in records])
    return SumRateEstimate.from_samples(totals, GUARANTEED, eps)


def truncation_contribution(config: NetworkConfig, strategy: PowerStrategy, c, trials: int,
                            threads: int = 1, stream: int = 0):
    """Fraction of the simulated sum-rate earned by links with h > c log n.

    ``c`` may be a scalar or a sequence; all values share the same trials.
    """
    cs = np.atleast_1d(np.asarray(c, dtype=float))
    if np.any(cs <= 1):
        raise ValueError("c must exceed 1")
    cuts = cs * math.log(config.n) if config.n > 1 else cs * 0.0

    def one(rng, _t):
        trial = simulate_trial(config, strategy, rng)
        tails = [trial.rates[trial.direct > cut].sum() for cut in cuts]
        return trial.rates.sum(), tails

    out = run_trials(one, config.seed, stream, trials, threads)
    total = float(np.sum([o[0] for o in out]))
    tails = np.sum(np.array([o[1] for o in out]), axis=0)
    frac = tails / total if total > 0 else np.zeros_like(tails)
    return float(frac[0]) if np.ndim(c) == 0 else frac


def interference_samples(config: NetworkConfig, strategy: PowerStrategy, trials: int, threads: int = 1,
                         stream: int = 0) -> list[np.ndarray]:
    """Interference at the active receivers of each trial (all clusters pooled)."""
    return [r[0] for r in _interference_records(config, strategy, trials, threads, stream)]


__all__ = (
    "AVERAGE", "GUARANTEED", "TrialOutcome", "NetworkTrial", "SumRateEstimate", "InsufficientSamples",
    "DenseLimitError", "combined_stderr", "link_rate", "interference_at", "simulate_trial", "run_trials",
    "average_sum_rate", "interference_quantile", "guaranteed_sum_rate", "truncation_contribution",
    "interference_samples",
)

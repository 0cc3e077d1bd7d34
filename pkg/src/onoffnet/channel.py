"""Random channel realizations for one cluster, with lazily sampled cross gains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import NetworkConfig, ShadowingModel


def substream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the stream addressed by ``(seed, *key)``.

    Philox is keyed by a SeedSequence whose spawn key is the caller's index
    tuple, so e.g. trial ``t`` of sweep point ``p`` always sees the same
    numbers no matter which worker runs it or in what order.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def sample_direct_gains(n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. unit-mean exponential direct gains h_ii."""
    if n < 1:
        raise ValueError("n must be positive")
    return rng.standard_exponential(n)


def sample_cross_gains(alpha: float, shadowing: ShadowingModel, rng: np.random.Generator,
                       size: int | tuple[int, ...]) -> np.ndarray:
    """Cross gains: 0 w.p. 1-alpha, else beta*h with beta ~ shadowing, h ~ Exp(1) independent."""
    connected = rng.random(size) < alpha
    beta = shadowing.sample(rng, size)
    h = rng.standard_exponential(size)
    return np.where(connected, beta * h, 0.0)


def sample_cross_gain(alpha: float, shadowing: ShadowingModel, rng: np.random.Generator) -> float:
    return float(sample_cross_gains(alpha, shadowing, rng, 1)[0])


@dataclass(frozen=True)
class ChannelRealization:
    """Gains of one cluster.

    ``cross[a, b]`` is the gain from transmitter ``active[a]`` to receiver
    ``active[b]``; only pairs inside the active set are ever drawn. The
    diagonal is zero and carries no sampled value.
    """

    n: int
    direct: np.ndarray
    active: np.ndarray
    cross: np.ndarray

    @property
    def cross_count(self) -> int:
        m = len(self.active)
        return m * (m - 1)

    def cross_entries(self) -> dict[tuple[int, int], float]:
        out = {}
        for a, k in enumerate(self.active):
            for b, i in enumerate(self.active):
                if a != b:
                    out[(int(k), int(i))] = float(self.cross[a, b])
        return out


def sample_realization(config: NetworkConfig, rng: np.random.Generator, active_set=None,
                       direct: np.ndarray | None = None) -> ChannelRealization:
    """Sample a cluster realization; cross gains only among ``active_set`` (None means all links)."""
    n = config.n
    if direct is None:
        direct = sample_direct_gains(n, rng)
    elif len(direct) != n:
        raise ValueError("direct gains do not match the cluster size")
    if active_set is None:
        active = np.arange(n)
    else:
        active = np.unique(np.asarray(list(active_set) if not isinstance(active_set, np.ndarray) else active_set,
                                      dtype=np.int64))
        if active.size and (active[0] < 0 or active[-1] >= n):
            raise IndexError("active set contains indices outside the cluster")
    m = active.size
    cross = sample_cross_gains(config.alpha, config.shadowing, rng, (m, m)) if m > 1 else np.zeros((m, m))
    np.fill_diagonal(cross, 0.0)
    return ChannelRealization(n, direct, active, cross)

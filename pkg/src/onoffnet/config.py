"""Scenario configuration: network parameters and the shadowing law of cross links."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy import optimize, special

CONSTANT = "constant"
UNIFORM = "uniform"
LOGNORMAL = "lognormal"
SHADOW_KINDS = (CONSTANT, UNIFORM, LOGNORMAL)

DEFAULT_BETA_MIN = 1e-3
DEFAULT_BETA_MAX = 10.0


class ConfigError(ValueError):
    """Raised when a configuration violates a model invariant."""


@dataclass(frozen=True)
class ShadowingModel:
    """Distribution of the bounded shadowing factor beta of a cross link.

    ``lognormal`` is a lognormal with the requested mean and variance,
    truncated to ``[beta_min, beta_max]`` and rescaled by a multiplicative
    constant so that the truncated law keeps ``E[beta] = mean``.
    """

    kind: str = LOGNORMAL
    mean: float = 0.5
    variance: float = 1.0
    beta_min: float = DEFAULT_BETA_MIN
    beta_max: float = DEFAULT_BETA_MAX
    # underlying normal parameters (lognormal only), solved at construction
    _mu: float = field(default=0.0, repr=False, compare=False)
    _sigma: float = field(default=0.0, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in SHADOW_KINDS:
            raise ConfigError(f"unknown shadowing kind {self.kind!r}; expected one of {SHADOW_KINDS}")
        if not 0.0 < self.mean <= 1.0:
            raise ConfigError(f"shadowing mean must lie in (0, 1], got {self.mean}")
        if self.variance < 0:
            raise ConfigError("shadowing variance must be non-negative")
        if not (0.0 < self.beta_min <= self.beta_max < math.inf):
            raise ConfigError("need 0 < beta_min <= beta_max < inf")
        if not self.beta_min <= self.mean <= self.beta_max:
            raise ConfigError("shadowing mean must lie inside [beta_min, beta_max]")
        if self.kind == CONSTANT:
            if self.variance != 0.0 or self.beta_min != self.mean or self.beta_max != self.mean:
                raise ConfigError("constant shadowing needs variance 0 and beta_min = beta_max = mean")
        elif self.kind == UNIFORM:
            mid = 0.5 * (self.beta_min + self.beta_max)
            var = (self.beta_max - self.beta_min) ** 2 / 12.0
            if not (math.isclose(mid, self.mean, rel_tol=1e-9) and math.isclose(var, self.variance, rel_tol=1e-9, abs_tol=1e-15)):
                raise ConfigError("uniform shadowing: mean/variance inconsistent with bounds")
        else:
            mu, sigma = _fit_truncated_lognormal(self.mean, self.variance, self.beta_min, self.beta_max)
            object.__setattr__(self, "_mu", mu)
            object.__setattr__(self, "_sigma", sigma)

    @classmethod
    def constant(cls, value: float) -> "ShadowingModel":
        return cls(CONSTANT, value, 0.0, value, value)

    @classmethod
    def uniform(cls, low: float, high: float) -> "ShadowingModel":
        return cls(UNIFORM, 0.5 * (low + high), (high - low) ** 2 / 12.0, low, high)

    @classmethod
    def lognormal(cls, mean: float, variance: float = 1.0, beta_min: float = DEFAULT_BETA_MIN,
                  beta_max: float = DEFAULT_BETA_MAX) -> "ShadowingModel":
        return cls(LOGNORMAL, mean, variance, beta_min, beta_max)

    def sample(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> np.ndarray:
        """Draw beta samples; always consumes one uniform per sample."""
        u = rng.random(size)
        if self.kind == CONSTANT:
            return np.full(np.shape(u), self.mean)
        if self.kind == UNIFORM:
            return self.beta_min + (self.beta_max - self.beta_min) * u
        a, b = self._std_bounds()
        lo, hi = special.ndtr(a), special.ndtr(b)
        z = special.ndtri(lo + (hi - lo) * u)
        return np.clip(np.exp(self._mu + self._sigma * z), self.beta_min, self.beta_max)

    def moment(self, k: int) -> float:
        """Exact raw moment E[beta^k] of the (truncated) law."""
        if self.kind == CONSTANT:
            return self.mean ** k
        if self.kind == UNIFORM:
            lo, hi = self.beta_min, self.beta_max
            if hi == lo:
                return lo ** k
            return (hi ** (k + 1) - lo ** (k + 1)) / ((k + 1) * (hi - lo))
        return _trunc_lognormal_moment(k, self._mu, self._sigma, self.beta_min, self.beta_max)

    @property
    def kappa(self) -> float:
        return self.moment(2)

    @property
    def eta(self) -> float:
        return self.moment(3)

    def _std_bounds(self) -> tuple[float, float]:
        return ((math.log(self.beta_min) - self._mu) / self._sigma,
                (math.log(self.beta_max) - self._mu) / self._sigma)


def _trunc_lognormal_moment(k: int, mu: float, sigma: float, lo: float, hi: float) -> float:
    a = (math.log(lo) - mu) / sigma
    b = (math.log(hi) - mu) / sigma
    z = special.ndtr(b) - special.ndtr(a)
    num = special.ndtr(b - k * sigma) - special.ndtr(a - k * sigma)
    return math.exp(k * mu + 0.5 * (k * sigma) ** 2) * num / z


def _fit_truncated_lognormal(mean: float, variance: float, lo: float, hi: float) -> tuple[float, float]:
    """Shape from the untruncated mean/variance; location shifted so the truncated mean is exact."""
    if variance == 0.0:
        raise ConfigError("lognormal shadowing needs a positive variance; use kind=constant")
    sigma = math.sqrt(math.log1p(variance / mean ** 2))
    mu0 = math.log(mean) - 0.5 * sigma ** 2

    def gap(shift: float) -> float:
        return _trunc_lognormal_moment(1, mu0 + shift, sigma, lo, hi) - mean

    # truncated mean is increasing in the location shift, from lo to hi
    shift = optimize.brentq(gap, math.log(lo) - mu0 - 5 * sigma, math.log(hi) - mu0 + 5 * sigma,
                            xtol=1e-14, rtol=1e-14)
    return mu0 + shift, sigma


@dataclass(frozen=True)
class NetworkConfig:
    """K links split evenly into M clusters on orthogonal subchannels of W/M each."""

    K: int = 100
    M: int = 1
    W: float = 1.0
    N0: float = 1.0
    alpha: float = 0.5
    shadowing: ShadowingModel = field(default_factory=ShadowingModel)
    seed: int = 12345

    def __post_init__(self) -> None:
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError(f"K must be a positive integer, got {self.K}")
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError(f"M must be a positive integer, got {self.M}")
        if self.K % self.M:
            raise ConfigError(f"M must divide K (K mod M = 0); got K={self.K}, M={self.M}")
        if not self.W > 0:
            raise ConfigError("bandwidth W must be positive")
        if not self.N0 >= 0:
            raise ConfigError("noise density N0 must be non-negative")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must lie in [0, 1]")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @property
    def n(self) -> int:
        return self.K // self.M

    @property
    def alpha_hat(self) -> float:
        return self.alpha * self.shadowing.mean

    @property
    def noise(self) -> float:
        """Per-receiver noise power N0 W / M."""
        return self.N0 * self.W / self.M

    @property
    def subband(self) -> float:
        return self.W / self.M

    def with_(self, **changes) -> "NetworkConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, str]:
        s = self.shadowing
        return {
            "k": str(self.K),
            "m": str(self.M),
            "bandwidth_w": repr(float(self.W)),
            "noise_n0": repr(float(self.N0)),
            "alpha": repr(float(self.alpha)),
            "shadow.kind": s.kind,
            "shadow.mean": repr(float(s.mean)),
            "shadow.variance": repr(float(s.variance)),
            "shadow.beta_min": repr(float(s.beta_min)),
            "shadow.beta_max": repr(float(s.beta_max)),
            "seed": str(self.seed),
        }


CONFIG_KEYS = ("k", "m", "bandwidth_w", "noise_n0", "alpha", "shadow.kind", "shadow.mean",
               "shadow.variance", "shadow.beta_min", "shadow.beta_max", "seed")


def config_from_mapping(values: Mapping[str, str], base: NetworkConfig | None = None) -> NetworkConfig:
    """Build a config from flat string keys, falling back to ``base`` (or defaults) per key."""
    unknown = set(values) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base = base or NetworkConfig()
    merged = {**base.to_dict(), **{k: str(v) for k, v in values.items()}}
    kind = merged["shadow.kind"].strip().lower()
    try:
        mean = float(merged["shadow.mean"])
        shadow_changed = any(k.startswith("shadow.") for k in values)
        if not shadow_changed:
            shadowing = base.shadowing
        elif kind == CONSTANT:
            shadowing = ShadowingModel.constant(mean)
        elif kind == UNIFORM:
            if "shadow.beta_min" in values or "shadow.beta_max" in values:
                shadowing = ShadowingModel.uniform(float(merged["shadow.beta_min"]), float(merged["shadow.beta_max"]))
            else:
                half = math.sqrt(3.0 * float(merged["shadow.variance"]))
                shadowing = ShadowingModel.uniform(mean - half, mean + half)
        else:
            shadowing = ShadowingModel(kind, mean, float(merged["shadow.variance"]),
                                       float(merged["shadow.beta_min"]), float(merged["shadow.beta_max"]))
        return NetworkConfig(
            K=_parse_int(merged["k"], "k"),
            M=_parse_int(merged["m"], "m"),
            W=float(merged["bandwidth_w"]),
            N0=float(merged["noise_n0"]),
            alpha=float(merged["alpha"]),
            shadowing=shadowing,
            seed=_parse_int(merged["seed"], "seed"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {text!r}") from None


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.lower()] = value
    return out


def load_config(path: str | Path, base: NetworkConfig | None = None) -> NetworkConfig:
    return config_from_mapping(parse_config_text(Path(path).read_text()), base)


def dump_config(config: NetworkConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in config.to_dict().items())


def save_config(config: NetworkConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(config))

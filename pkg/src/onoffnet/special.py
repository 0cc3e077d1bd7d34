"""Exponential integrals E1(x) and Ei(x) for real arguments.

Three evaluation routes are used for ``E1``:

* the convergent Euler series ``-gamma - log x + sum (-1)^{s+1} x^s / (s s!)``
  for small arguments,
* a continued fraction (modified Lentz) in the intermediate range, where the
  alternating series loses all digits to cancellation,
* the divergent asymptotic expansion ``e^{-x}/x * sum k!/(-x)^k`` for large
  arguments, truncated at its smallest term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EULER_GAMMA = 0.577215664901533


@dataclass(frozen=True)
class SeriesConfig:
    max_terms: int = 500
    rel_tol: float = 1e-15
    series_limit: float = 1.0  # Euler series used for x <= series_limit
    switch_point: float = 40.0  # asymptotic expansion used for x >= switch_point

    def __post_init__(self) -> None:
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")
        if not 0.0 < self.rel_tol < 1e-8:
            raise ValueError("rel_tol must lie in (0, 1e-8)")
        if self.switch_point <= 0 or self.series_limit <= 0:
            raise ValueError("switch points must be positive")
        if self.series_limit > self.switch_point:
            raise ValueError("series_limit must not exceed switch_point")


DEFAULT_SERIES = SeriesConfig()


def euler_series_terms(x: float, terms: int) -> list[float]:
    """Partial sums of the Euler series for E1 after 1..terms correction terms."""
    base = -EULER_GAMMA - math.log(x)
    out = []
    acc = 0.0
    power_over_fact = 1.0
    for s in range(1, terms + 1):
        power_over_fact *= x / s
        acc += (-1) ** (s + 1) * power_over_fact / s
        out.append(base + acc)
    return out


def _e1_series(x: float, cfg: SeriesConfig) -> float:
    base = -EULER_GAMMA - math.log(x)
    acc = 0.0
    power_over_fact = 1.0
    for s in range(1, cfg.max_terms + 1):
        power_over_fact *= x / s
        term = power_over_fact / s
        acc += term if s % 2 else -term
        if term <= cfg.rel_tol * abs(base + acc):
            break
    return base + acc


def _e1_scaled_cf(x: float, cfg: SeriesConfig) -> float:
    # e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, cfg.max_terms + 1):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < cfg.rel_tol:
            return h
    raise ArithmeticError(f"continued fraction for E1({x}) did not converge")


def _asymptotic_sum(x: float, max_terms: int, rel_tol: float | None) -> float:
    """sum_{k<max_terms} k!/x^k, stopping early at the smallest term if rel_tol is set."""
    total = 1.0
    term = 1.0
    for k in range(1, max_terms):
        nxt = term * k / x
        if rel_tol is not None and (abs(nxt) >= abs(term) or abs(nxt) < rel_tol * abs(total)):
            if abs(nxt) < abs(term):
                total += nxt
            break
        term = nxt
        total += term
    return total


def e1_scaled(x: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Return ``exp(x) * E1(x)``, finite for every ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"E1 is defined for x > 0, got {x}")
    if x <= cfg.series_limit:
        return math.exp(x) * _e1_series(x, cfg)
    if x < cfg.switch_point:
        return _e1_scaled_cf(x, cfg)
    return _asymptotic_sum(-x, cfg.max_terms, cfg.rel_tol) / x


def e1(x: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Exponential integral ``E1(x) = int_1^inf exp(-t x)/t dt`` for ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"E1 is defined for x > 0, got {x}")
    if x <= cfg.series_limit:
        return _e1_series(x, cfg)
    return math.exp(-x) * e1_scaled(x, cfg)


def ei_asymptotic(x: float, L: int) -> float:
    """Truncated asymptotic expansion ``(e^x/x) * sum_{k=0}^{L-1} k!/x^k`` of Ei.

    Only meaningful for large negative ``x`` (roughly ``|x| >= 10``); the
    series diverges for every fixed ``x`` as ``L`` grows. For negative ``x``
    the terms alternate, so the truncation error is bounded by the first
    omitted term.
    """
    x = float(x)
    if not x < 0:
        raise ValueError(f"ei_asymptotic requires x < 0, got {x}")
    if L < 1:
        raise ValueError("L must be at least 1")
    return math.exp(x) / x * _asymptotic_sum(x, L, None)


def ei(x: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Ei(x) for negative real ``x`` via ``Ei(x) = -E1(-x)``."""
    x = float(x)
    if not x < 0:
        raise ValueError("only negative arguments are supported")
    return -e1(-x, cfg)

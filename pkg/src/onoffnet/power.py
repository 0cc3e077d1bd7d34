"""Power strategies and threshold solvers for on-off power allocation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ASYMPTOTIC = "asymptotic"
EXACT = "exact"
FIXED_POINT = "fixed-point"
GRID = "grid"  # fallback of the exact solver when the first-order condition has no sign change
METHODS = (ASYMPTOTIC, EXACT, FIXED_POINT)

ON_OFF = "onoff"
FULL = "full"
CUSTOM = "custom"

BISECTION_TOL = 1e-9
LOWER_BRACKET = 0.1



@dataclass(frozen=True)
class ThresholdSolution:
    tau: float
    q: float
    method: str
    objective_value: float

    @classmethod
    def build(cls, tau: float, method: str, objective_value: float) -> "ThresholdSolution":
        return cls(tau, math.exp(-tau), method, objective_value)


@dataclass(frozen=True)
class PowerStrategy:
    """Maps direct gains to transmit powers (P_max = 1)."""

    kind: str
    tau: float | None = None
    method: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in (ON_OFF, FULL, CUSTOM):
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind == FULL:
            if self.tau is not None:
                raise ValueError("full power takes no threshold")
        elif self.tau is None or not self.tau >= 0:
            raise ValueError("threshold strategies need tau >= 0")

    @classmethod
    def on_off(cls, solution: ThresholdSolution) -> "PowerStrategy":
        return cls(ON_OFF, solution.tau, solution.method)

    @classmethod
    def full_power(cls) -> "PowerStrategy":
        return cls(FULL)

    @classmethod
    def custom(cls, tau: float) -> "PowerStrategy":
        return cls(CUSTOM, float(tau))

    def powers(self, h: np.ndarray) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        if self.kind == FULL:
            return np.ones_like(h)
        return (h > self.tau).astype(float)

    @property
    def label(self) -> str:
        return self.kind if self.kind == FULL else f"{self.kind}(tau={self.tau:.6g})"


def on_off_power(h: float, tau: float) -> int:
    """1 iff h > tau; the tie h == tau stays off."""
    if h < 0 or tau < 0:
        raise ValueError("h and tau must be non-negative")
    return 1 if h > tau else 0


def expected_onoff_utility(tau, n: int, alpha_hat: float, W: float = 1.0, M: int = 1):
    """Large-n expected cluster sum-rate of the on-off scheme at threshold tau.

    ``(n e^{-tau} W / M) * log(1 + tau e^{tau} / (n alpha_hat))``; accepts
    scalar or array ``tau``.
    """
    if not alpha_hat > 0:
        raise ValueError("alpha_hat must be positive")
    tau = np.asarray(tau, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        x = tau * np.exp(tau) / (n * alpha_hat)
        val = n * np.exp(-tau) * W / M * np.log1p(x)
    val = np.where(np.isinf(tau), 0.0, val)
    return float(val) if val.ndim == 0 else val


def first_order_condition(tau: float, n: int, alpha_hat: float) -> float:
    """Derivative of the on-off utility in tau, up to the positive factor nW/M."""
    na = n * alpha_hat
    te = tau * math.exp(tau)
    return -math.exp(-tau) * math.log1p(te / na) + (1.0 + tau) / (na + te)


def _bisect(f, lo: float, hi: float, tol: float = BISECTION_TOL) -> float:
    flo = f(lo)
    for _ in range(200):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _check_n(n: int) -> None:
    if n < 3:
        raise ValueError(f"threshold solvers need n >= 3 (log log n > 0), got n={n}")


def threshold_asymptotic(n: int, alpha_hat: float | None = None, W: float = 1.0, M: int = 1) -> ThresholdSolution:
    """tau = log n - 2 log log n, i.e. q = log^2 n / n (O(1) slack set to zero)."""
    _check_n(n)
    tau = math.log(n) - 2.0 * math.log(math.log(n))
    objective = expected_onoff_utility(tau, n, alpha_hat, W, M) if alpha_hat else math.nan
    return ThresholdSolution.build(tau, ASYMPTOTIC, objective)


def grid_maximizer(n: int, alpha_hat: float, step: float = 1e-4, lo: float = LOWER_BRACKET,
                   hi: float | None = None) -> float:
    """Brute-force maximizer of the on-off utility over a uniform tau grid."""
    hi = math.log(n) if hi is None else hi
    grid = np.arange(lo, hi + 0.5 * step, step)
    return float(grid[np.argmax(expected_onoff_utility(grid, n, alpha_hat))])


def threshold_exact(n: int, alpha_hat: float, W: float = 1.0, M: int = 1) -> ThresholdSolution:
    """Root of the first-order condition on [0.1, log n], by bisection.

    Falls back to a grid-search maximizer (method ``grid``) when the
    condition has no sign change on the bracket.
    """
    _check_n(n)
    if not 0 < alpha_hat <= 1:
        raise ValueError("alpha_hat must lie in (0, 1]")
    lo, hi = LOWER_BRACKET, math.log(n)
    f = lambda t: first_order_condition(t, n, alpha_hat)  # noqa: E731
    if f(lo) > 0 > f(hi):
        tau = _bisect(f, lo, hi)
        return ThresholdSolution.build(tau, EXACT, expected_onoff_utility(tau, n, alpha_hat, W, M))
    tau = grid_maximizer(n, alpha_hat, lo=lo, hi=hi)
    return ThresholdSolution.build(tau, GRID, expected_onoff_utility(tau, n, alpha_hat, W, M))


def threshold_fixed_point(n: int, alpha_hat: float, W: float = 1.0, M: int = 1) -> ThresholdSolution:
    """Solve tau^2 e^tau = n alpha_hat for tau > 0 by bisection."""
    target = n * alpha_hat
    if not target > 1:
        raise ValueError(f"fixed-point threshold needs n*alpha_hat > 1, got {target}")
    # tau^2 e^tau is increasing on tau > 0 and equals target somewhere below log(target)+1
    lo, hi = 0.0, max(1.0, math.log(target) + 1.0)
    tau = _bisect(lambda t: t * t * math.exp(t) - target, lo, hi, tol=1e-14)
    objective = expected_onoff_utility(tau, n, alpha_hat, W, M) if n >= 2 else math.nan
    return ThresholdSolution.build(tau, FIXED_POINT, objective)


SOLVERS = {
    ASYMPTOTIC: threshold_asymptotic,
    EXACT: threshold_exact,
    FIXED_POINT: threshold_fixed_point,
}


def solve_threshold(method: str, n: int, alpha_hat: float, W: float = 1.0, M: int = 1) -> ThresholdSolution:
    try:
        solver = SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown threshold method {method!r}; expected one of {METHODS}") from None
    return solver(n, alpha_hat, W, M)

"""Closed-form sum-rate predictors and bounds used as oracles for the simulator.

All ``[1 + o(1)]`` factors are taken as 1 and ``O(1)`` slacks as 0, so these
are finite-n evaluations of asymptotic statements, not exact values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import integrate

from .special import EULER_GAMMA, e1_scaled

STRONG = "strong"
MODERATE = "moderate"
WEAK = "weak"
ALPHA_ZERO = "alpha-zero"
M_EQUALS_K = "m-equals-k"
M_THETA_K = "m-theta-k"
GUARANTEED_UPPER = "guaranteed-upper"
GUARANTEED_LOWER = "guaranteed-lower"

XI_VALIDITY_FLOOR = 10.0


class ValidityError(ArithmeticError):
    """An asymptotic expansion was requested outside its validity range."""


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    regime: str
    inputs: dict = field(default_factory=dict)


def classify_regime(n: int, q: float, alpha_hat: float) -> str:
    """Finite-n stand-in for E[I] = omega(1) / Theta(1) / o(1)."""
    load = n * q * alpha_hat
    if load >= 10:
        return STRONG
    if load > 0.1:
        return MODERATE
    return WEAK


def avg_sum_rate_asymptote(K: int, M: int, alpha_hat: float, W: float = 1.0) -> float:
    """(W / alpha_hat) log(K / M)."""
    if K / M < 3:
        raise ValueError("need K/M >= 3")
    if not alpha_hat > 0:
        raise ValueError("alpha_hat must be positive")
    return W / alpha_hat * math.log(K / M)


def xi_upper_bound(p: float, h: float, n: int, alpha: float, varpi: float, kappa: float, eta: float,
                   q: float, W: float = 1.0, M: int = 1, N0: float = 1.0) -> float:
    """Upper bound on one user's utility as a function of its own power p.

    Uses the four-term expansion of the exponential integral; refuses when
    the residual interference-plus-noise level lambda' is below 10.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    alpha_hat = alpha * varpi
    noise = N0 * W / M
    lam = (n - 1) * alpha_hat * q + noise
    lam2 = (n - 2) * alpha_hat * q + noise
    if lam2 < XI_VALIDITY_FLOOR:
        raise ValidityError(f"lambda' = {lam2:.4g} < {XI_VALIDITY_FLOOR}; expansion not valid")
    tau = -math.log(q)
    mu = (1.0 + tau) * q
    x = p / lam2
    own = W / M * h / lam * p
    shadowed = n * alpha * W * mu / (M * lam2) * (1 - varpi * x + 2 * kappa * x ** 2 - 6 * eta * x ** 3)
    clear = n * (1 - alpha) * W * mu / (M * lam2)
    return own + shadowed + clear


def closed_form_alpha0(K: int, M: int, W: float = 1.0, N0: float = 1.0) -> float:
    """Average sum-rate without interference: (K W / M) e^{a} E1(a), a = N0 W / M."""
    a = N0 * W / M
    if not a > 0:
        raise ValueError("N0 W / M must be positive")
    return K * W / M * e1_scaled(a)


def closed_form_M_equals_K(K: int, W: float = 1.0, N0: float = 1.0) -> tuple[float, float]:
    """Exact W e^{a} E1(a) with a = N0 W / K, and the large-K form W (log K - log N0 W - gamma)."""
    if K < 2:
        raise ValueError("need K >= 2")
    if not N0 * W > 0:
        raise ValueError("N0 W must be positive")
    exact = W * e1_scaled(N0 * W / K)
    asymptote = W * (math.log(K) - math.log(N0 * W) - EULER_GAMMA)
    return exact, asymptote


def bound_moderate_weak(n: int, q: float, M: int, c: float, N0: float, alpha_hat: float,
                        W: float = 1.0, regime: str | None = None) -> BoundReport:
    """(c M / N0) n q log n, tagged with the interference regime."""
    if not c > 1:
        raise ValueError("c must exceed 1")
    value = c * M / N0 * n * q * math.log(n)
    regime = regime or classify_regime(n, q, alpha_hat)
    return BoundReport("moderate-weak-bound", value, regime,
                       dict(n=n, q=q, M=M, c=c, N0=N0, W=W, alpha_hat=alpha_hat))


def shadow_activity_factor(alpha: float, m: int) -> float:
    """alpha m (1 - alpha)^{m-1}; below 1 for every alpha in (0, 1] and m >= 2."""
    return alpha * m * (1 - alpha) ** (m - 1)


def bound_theta_K(M: int, Gamma: int, m: int, K: int, W: float = 1.0, N0: float = 1.0,
                  alpha: float = 0.5) -> BoundReport:
    """Upper bound when M grows like K: Gamma single-user clusters plus M - Gamma crowded ones."""
    if not 0 <= Gamma <= M:
        raise ValueError("need 0 <= Gamma <= M")
    if m < 2:
        raise ValueError("need m >= 2")
    log_term = math.log1p(K / (N0 * W))
    value = Gamma * W / M * log_term + (M - Gamma) * W / M * m * (1 - alpha) ** (m - 1) * log_term
    return BoundReport("theta-k-bound", value, M_THETA_K, dict(M=M, Gamma=Gamma, m=m, K=K, W=W, N0=N0, alpha=alpha))


@dataclass(frozen=True)
class GuaranteedBounds:
    lower: float
    upper: float
    lower_linearized: float
    psi: float
    eps_conc: float


def concentration_slack(n: int, q: float) -> float:
    """(n q)^{-3/8}: order of the relative interference deviation in the concentration argument."""
    return (n * q) ** -0.375


def guaranteed_bounds(K: int, M: int, alpha_hat: float, W: float, N0: float, tau: float,
                      eps_conc: float | None = None) -> GuaranteedBounds:
    """Lower and upper bounds on the guaranteed sum-rate of the on-off scheme.

    ``lower = n W int_tau^Psi log(1 + v / D) e^{-v} dv`` with
    ``D = (n-1) alpha_hat q (1 + eps_conc) + N0 W / M`` and
    ``Psi = log n + 2 log log n``, by adaptive quadrature. The linearized
    value replaces log(1+x) by x and integrates in closed form.
    ``eps_conc`` defaults to :func:`concentration_slack`.
    """
    n = K // M
    if n < 3:
        raise ValueError("need n >= 3")
    psi = math.log(n) + 2.0 * math.log(math.log(n))
    if not tau < psi:
        raise ValueError(f"tau = {tau} must be below Psi_n = {psi}")
    if not alpha_hat > 0:
        raise ValueError("alpha_hat must be positive")
    q = math.exp(-tau)
    if eps_conc is None:
        eps_conc = concentration_slack(n, q)
    if not 0.0 <= eps_conc < 0.5:
        raise ValueError("eps_conc must lie in [0, 0.5)")
    denom = (n - 1) * alpha_hat * q * (1.0 + eps_conc) + N0 * W / M
    integral, _ = integrate.quad(lambda v: math.log1p(v / denom) * math.exp(-v), tau, psi,
                                 epsabs=0.0, epsrel=1e-12, limit=200)
    lower = n * W * integral
    linear = n * W / denom * ((tau + 1) * math.exp(-tau) - (psi + 1) * math.exp(-psi))
    upper = W / alpha_hat * math.log(K)
    return GuaranteedBounds(lower, upper, linear, psi, eps_conc)

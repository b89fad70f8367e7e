"""Theory-side calculators: tuning schedules, rate curves, covering bound and a
weak-dependence diagnostic.

Asymptotic relations are made concrete with explicit multipliers
(``c_L``, ``c_N``, ``c_B``, ``c_lambda``), all defaulting to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

TASKS = ("regression", "classification")


@dataclass(frozen=True)
class ScheduleExponents:
    """Exponents and constants of the tuning schedules.

    For ``task="classification"`` the penalty weight decays like
    ``(log n)^nu3 / n``; pass ``nu4=1`` to follow that reading. The joint
    ``nu4 + nu6`` condition is then checked only when ``nu4 < 1``.
    """

    nu1: float = 0.5
    nu2: float = 0.5
    nu3: float = 1.0
    nu4: float = 0.5
    nu5: float = 1.0
    nu6: float = 0.25
    kappa: float = 1.0
    r: float = 1.0
    c_L: float = 1.0
    c_N: float = 1.0
    c_B: float = 1.0
    c_lambda: float = 1.0
    task: str = "regression"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        for name in ("nu1", "nu2", "nu3", "nu5", "nu6"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.nu6 < 0.5:
            raise ValueError("violates nu6 < 1/2")
        upper_ok = self.nu4 <= 1 if self.task == "classification" else self.nu4 < 1
        if not (self.nu4 > 0 and upper_ok):
            raise ValueError("violates 0 < nu4 < 1" + (" (nu4 = 1 allowed for classification)"
                                                       if self.task == "classification" else ""))
        if self.task == "classification" and self.nu4 == 1:
            return
        s = self.nu4 + self.nu6
        if math.isclose(s, 1.0, rel_tol=0, abs_tol=1e-12):
            if not self.nu5 > 1 - self.nu3:
                raise ValueError("nu4 + nu6 = 1 requires nu5 > 1 - nu3")
        elif s > 1:
            raise ValueError("violates nu4 + nu6 < 1 (or = 1 with nu5 > 1 - nu3)")


@dataclass(frozen=True)
class Schedule:
    L: int
    N: int
    B: float
    lam: float
    tau_max: float
    beta: float
    K: float


def k_constant(n: float, rho: float = 1.0, h_star: float = 1.0) -> float:
    """``max(sqrt(32 rho^2) sqrt(log n), H*)``."""
    return max(math.sqrt(32.0 * rho * rho) * math.sqrt(math.log(n)), h_star)


def tau_denominator(L: int, N: int, B: float, scale: float) -> float:
    """``scale * (L+1) * ((N+1) B)^(L+1)``."""
    return scale * (L + 1) * ((N + 1) * B) ** (L + 1)


def schedule(n: float, exp: ScheduleExponents, rho: float = 1.0, h_star: float = 1.0,
             lipschitz_loss: float = 1.0) -> Schedule:
    if not n >= 2:
        raise ValueError("n must be >= 2")
    ln = math.log(n)
    # the 1e-12 slack keeps ceil() from rounding up on log() noise
    L = max(1, math.ceil(exp.c_L * ln - 1e-12))
    N = math.ceil(exp.c_N * n**exp.nu1)
    B = max(1.0, exp.c_B * n**exp.nu2)
    lam = exp.c_lambda * ln**exp.nu3 / n**exp.nu4
    beta = ln**exp.nu5 / n**exp.nu6
    if exp.task == "regression":
        K = k_constant(n, rho, h_star)
        scale = 16.0 * K
    else:
        K = lipschitz_loss
        scale = 4.0 * K
    tau = beta / tau_denominator(L, N, B, scale)
    return Schedule(L=L, N=N, B=B, lam=lam, tau_max=tau, beta=beta, K=K)


def regression_rate(n: float, exp: ScheduleExponents) -> float:
    ln = math.log(n)
    a = ln ** (exp.r + exp.nu3) / n ** (2.0 * exp.nu4 / (exp.kappa + 2.0))
    b = ln**exp.nu5 / n**exp.nu6
    return max(a, b)


def classification_rate(n: float, exp: ScheduleExponents) -> float:
    ln = math.log(n)
    a = ln ** (exp.r + exp.nu3) / n ** (exp.nu4 / (exp.kappa + 1.0))
    b = ln**exp.nu5 / n**exp.nu6
    return max(a, b)


def log_poly_threshold(power: float, exponent: float) -> float:
    """Smallest n beyond which ``(log n)^power / n^exponent`` is decreasing.

    The derivative in log n changes sign at ``log n = power / exponent``.
    """
    if exponent <= 0:
        return math.inf
    return math.exp(max(power, 0.0) / exponent)


def rate_threshold(exp: ScheduleExponents, task: str = "regression") -> float:
    """n beyond which both terms of the rate are non-increasing."""
    first = 2.0 * exp.nu4 / (exp.kappa + 2.0) if task == "regression" else exp.nu4 / (exp.kappa + 1.0)
    return max(log_poly_threshold(exp.r + exp.nu3, first), log_poly_threshold(exp.nu5, exp.nu6))


def covering_bound(eps: float, L: int, N: int, B: float, j: int, alpha: float,
                   lam: float, tau: float, K: float) -> float:
    """Log of the covering-number bound for the penalty slice indexed by ``j``.

    Returns ``2 (2^j alpha / lam) (L+1) log((L+1)(N+1)B / (eps/(4K) - tau (L+1)((N+1)B)^(L+1)))``.
    """
    if not (eps > 0 and lam > 0 and K > 0):
        raise ValueError("eps, lam and K must be positive")
    denom = eps / (4.0 * K) - tau * (L + 1) * ((N + 1) * B) ** (L + 1)
    if not denom > 0:
        raise ValueError("tau too large for this epsilon")
    return 2.0 * (2.0**j * alpha / lam) * (L + 1) * math.log((L + 1) * (N + 1) * B / denom)


def _clipped_identity(x):
    return np.clip(x, -1.0, 1.0)


DEFAULT_TEST_FUNCTIONS: tuple[Callable, ...] = (_clipped_identity, np.sin)


def dependence_diagnostic(series, r_max: int,
                          test_functions: Sequence[Callable] = DEFAULT_TEST_FUNCTIONS) -> np.ndarray:
    """Empirical covariance-decay profile.

    Entry ``r-1`` is the largest ``|cov(g1(Z_t), g2(Z_{t+r}))|`` over all
    ordered pairs drawn from ``test_functions``.
    """
    z = np.asarray(series, dtype=np.float64)
    if z.ndim != 1 or z.size <= r_max + 1:
        raise ValueError("series must be one-dimensional and longer than r_max + 1")
    mapped = [np.asarray(g(z), dtype=np.float64) for g in test_functions]
    # covariance is shift invariant; shifting first makes constant series exactly zero
    mapped = [a - a[0] for a in mapped]
    out = np.zeros(r_max)
    for r in range(1, r_max + 1):
        best = 0.0
        for a in mapped:
            head = a[:-r] - a[:-r].mean()
            for b in mapped:
                tail = b[r:] - b[r:].mean()
                best = max(best, abs(float(np.mean(head * tail))))
        out[r - 1] = best
    return out

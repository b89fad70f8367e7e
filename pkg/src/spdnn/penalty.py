"""Clipped-L1 sparsity penalty.

The clipped norm ``sum_j min(|theta_j| / tau, 1)`` behaves like a scaled L1
norm on small coordinates and like a count of nonzeros on large ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EFFECTIVE_ZERO = 1e-6


@dataclass(frozen=True)
class PenaltyParams:
    lam: float
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be strictly positive, got {self.tau}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")


def _check_tau(tau):
    if not tau > 0:
        raise ValueError(f"tau must be strictly positive, got {tau}")


def clipped_norm(theta, tau: float) -> float:
    _check_tau(tau)
    a = np.abs(np.asarray(theta, dtype=np.float64))
    return float(np.minimum(a / tau, 1.0).sum())


def penalty_value(theta, params: PenaltyParams) -> float:
    if params.lam == 0:
        return 0.0
    return params.lam * clipped_norm(theta, params.tau)


def penalty_subgradient(theta, params: PenaltyParams, out: np.ndarray | None = None) -> np.ndarray:
    """``lam * sign(theta_j) / tau`` on the linear branch ``|theta_j| < tau``, else 0.

    The kink ``|theta_j| == tau`` takes the saturated (zero) slope, and
    ``theta_j == 0`` takes ``sign(0) = 0``.
    """
    _check_tau(params.tau)
    theta = np.asarray(theta, dtype=np.float64)
    if out is None:
        out = np.empty_like(theta)
    np.sign(theta, out=out)
    out *= params.lam / params.tau
    out[np.abs(theta) >= params.tau] = 0.0
    return out


def l0_norm(theta, tol: float = 0.0) -> int:
    """Number of coordinates with ``|theta_j| > tol`` (exact count for tol=0)."""
    a = np.abs(np.asarray(theta, dtype=np.float64))
    return int(np.count_nonzero(a > tol))


def effective_sparsity(theta, tol: float = EFFECTIVE_ZERO) -> int:
    return l0_norm(theta, tol)

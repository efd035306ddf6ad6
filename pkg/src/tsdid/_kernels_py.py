"""Pure-Python/NumPy reference implementations of the hot kernels.

These are the fallback used when the compiled extension is unavailable
(see :mod:`tsdid.kernels`).  The recursive filters run scalar loops in the
same arithmetic order as the Cython twins so that generated series are
bit-identical across backends; the long-run variance kernels use vectorized
dot products and may differ from the compiled versions at rounding level.
"""

from __future__ import annotations

import numpy as np


def garch_filter(
    eps: np.ndarray,
    omega: float,
    alpha: float,
    beta: float,
    sigma2_init: float,
    e_init: float,
) -> np.ndarray:
    """GARCH(1,1) errors e_t = sigma_t * eps_t with
    sigma_t^2 = omega + alpha * e_{t-1}^2 + beta * sigma_{t-1}^2."""
    n = eps.shape[0]
    out = np.empty(n)
    sigma2 = sigma2_init
    e_prev = e_init
    for t in range(n):
        sigma2 = omega + alpha * (e_prev * e_prev) + beta * sigma2
        e_prev = np.sqrt(sigma2) * eps[t]
        out[t] = e_prev
    return out


def ar1_filter(u: np.ndarray, coeff: float, y_init: float) -> np.ndarray:
    """First-order recursion y_t = coeff * y_{t-1} + u_t."""
    n = u.shape[0]
    out = np.empty(n)
    y = y_init
    for t in range(n):
        y = coeff * y + u[t]
        out[t] = y
    return out


def bartlett_lrv(u: np.ndarray, lag: int) -> float:
    """Bartlett-kernel long-run variance of a (raw, not demeaned) series.

    gamma_0 + 2 * sum_{l=1}^{lag} (1 - l/(lag+1)) * gamma_l with
    gamma_l = (1/n) sum_t u_t u_{t-l}.
    """
    n = u.shape[0]
    total = float(u @ u)
    for ell in range(1, lag + 1):
        weight = 1.0 - ell / (lag + 1.0)
        total += 2.0 * weight * float(u[ell:] @ u[:-ell])
    return total / n


def bartlett_lrv_matrix(u: np.ndarray, lag: int) -> np.ndarray:
    """Multivariate Bartlett long-run covariance of an (n, k) score array."""
    n = u.shape[0]
    total = u.T @ u
    for ell in range(1, lag + 1):
        weight = 1.0 - ell / (lag + 1.0)
        cross = u[ell:].T @ u[:-ell]
        total = total + weight * (cross + cross.T)
    return total / n

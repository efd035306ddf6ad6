"""Time-series diagnostics: ADF, KPSS, and Durbin-Watson.

The unit-root and trend-stationarity tests are backed by statsmodels (which
carries the response-surface / tabulated critical values); the KPSS p-value
is censored to the tabulated range [0.01, 0.10] and reported with a bracket
marker.  The Durbin-Watson p-value uses the large-sample normal
approximation DW ~ 2(1 - rho1) with variance 4/n, so near the tails it is
accurate to a few hundredths only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import ValidationError


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    p_value: float
    lags: int


@dataclass(frozen=True)
class KpssResult:
    statistic: float
    p_value: float
    bracket: str  # "<=0.01", ">=0.10", or "interpolated"
    bandwidth: int


@dataclass(frozen=True)
class DwResult:
    statistic: float
    p_value: float


@dataclass(frozen=True)
class DiagnosticsReport:
    adf: AdfResult
    kpss: KpssResult
    dw: DwResult


def adf_test(series, max_lag: int | None = None, regression: str = "ct") -> AdfResult:
    """Augmented Dickey-Fuller test of a unit-root null.

    Lag order is chosen by AIC up to ``max_lag`` (default: the Schwert
    bound); the regression includes a constant and trend by default.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 15:
        raise ValidationError("ADF needs a 1-d series of at least 15 observations")
    if np.ptp(x) == 0:
        raise ValidationError("ADF is undefined for a constant series")
    from statsmodels.tsa.stattools import adfuller

    stat, pvalue, usedlag, *_ = adfuller(x, maxlag=max_lag, regression=regression, autolag="AIC")
    return AdfResult(statistic=float(stat), p_value=float(pvalue), lags=int(usedlag))


def kpss_bandwidth(n: int) -> int:
    """Automatic Bartlett bandwidth floor(4 * (n/100)^(1/4))."""
    return int(math.floor(4.0 * (n / 100.0) ** 0.25))


def kpss_test(series, regression: str = "ct") -> KpssResult:
    """Trend-stationarity (KPSS) test.

    The p-value is censored to the tabulated [0.01, 0.10] range; the bracket
    field records when censoring binds.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 20:
        raise ValidationError("KPSS needs a 1-d series of at least 20 observations")
    from statsmodels.tools.sm_exceptions import InterpolationWarning
    from statsmodels.tsa.stattools import kpss

    nlags = kpss_bandwidth(x.size)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InterpolationWarning)
        stat, pvalue, lags, _ = kpss(x, regression=regression, nlags=nlags)
    bracket = "interpolated"
    if pvalue >= 0.10:
        bracket = ">=0.10"
    elif pvalue <= 0.01:
        bracket = "<=0.01"
    return KpssResult(
        statistic=float(stat), p_value=float(pvalue), bracket=bracket, bandwidth=int(lags)
    )


def dw_test(residuals) -> DwResult:
    """Durbin-Watson test of zero autocorrelation, two-sided.

    Statistic sum((u_t - u_{t-1})^2) / sum(u_t^2) in [0, 4].
    """
    u = np.asarray(residuals, dtype=float)
    if u.ndim != 1 or u.size < 10:
        raise ValidationError("Durbin-Watson needs at least 10 residuals")
    denom = float(u @ u)
    if denom <= 0:
        raise ValidationError("Durbin-Watson is undefined for all-zero residuals")
    stat = float(np.sum(np.diff(u) ** 2) / denom)
    n = u.size
    z = (stat - 2.0) / (2.0 / math.sqrt(n))
    p = 2.0 * norm.sf(abs(z))
    return DwResult(statistic=stat, p_value=float(p))


def diagnose(series, residuals=None) -> DiagnosticsReport:
    """ADF and KPSS on a series plus Durbin-Watson on regression residuals.

    When ``residuals`` is omitted the series itself is demeaned and used.
    """
    x = np.asarray(series, dtype=float)
    resid = np.asarray(residuals, dtype=float) if residuals is not None else x - x.mean()
    return DiagnosticsReport(adf=adf_test(x), kpss=kpss_test(x), dw=dw_test(resid))

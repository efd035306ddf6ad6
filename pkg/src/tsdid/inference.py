"""Heteroskedasticity- and autocorrelation-robust inference.

Standard errors use the Bartlett (Newey-West) kernel.  For the closed-form
estimators the variance of the weighted sum ``sum_t omega_n(t) X_t`` is
estimated from the regime-demeaned weighted series; for regression-based
estimators a HAC sandwich around the weighted Gram matrix is used.  P-values
are standard normal (asymptotic); no prewhitening is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import norm

from . import kernels
from .errors import InferenceError, ValidationError
from .estimators import AttEstimate, panel_regime_weights
from .panel import Panel

NOMINAL_LEVELS = (0.01, 0.05, 0.10)


@dataclass(frozen=True)
class HacSpec:
    """Bartlett-kernel configuration.

    ``lag`` is an explicit truncation lag L >= 0; ``None`` selects the
    automatic rule: an AR(1)-plugin bandwidth guarded by a significance
    pretest on the lag-1 autocorrelation (lags are only spent when lag-1
    dependence is detectable at ``pretest_z`` normal standard errors).
    The plugin keeps the Bartlett estimate consistent under MA/AR
    dependence while avoiding the small-sample size distortion that a
    fixed-lag rule inflicts on serially uncorrelated series.
    """

    lag: int | None = None
    pretest_z: float = 2.576

    def __post_init__(self):
        if self.lag is not None and int(self.lag) < 0:
            raise ValidationError(f"HAC lag must be >= 0, got {self.lag}")


def fixed_rule_bandwidth(n: int) -> int:
    """Deterministic truncation lag floor(4 * (n/100)^(2/9)).

    Offered as an explicit alternative to the default data-driven rule:
    ``HacSpec(lag=fixed_rule_bandwidth(n))``.
    """
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def plugin_bandwidth(u: np.ndarray, pretest_z: float = 2.576) -> int:
    """AR(1)-plugin Bartlett bandwidth with a significance pretest.

    Returns 0 when the lag-1 autocorrelation of ``u`` is within
    ``pretest_z / sqrt(n)`` of zero; otherwise the Andrews plugin value
    ``floor(1.1447 * (a(1) * n)^(1/3))`` with ``a(1)`` from the fitted
    AR(1) coefficient (capped at 0.97 in absolute value).
    """
    n = u.shape[0]
    if n < 3:
        return 0
    denom = float(u[:-1] @ u[:-1])
    if denom <= 0.0:
        return 0
    rho = float(u[1:] @ u[:-1]) / denom
    if abs(rho) <= pretest_z / math.sqrt(n):
        return 0
    rho = min(max(rho, -0.97), 0.97)
    alpha1 = 4.0 * rho * rho / ((1.0 - rho) ** 2 * (1.0 + rho) ** 2)
    lag = int(math.floor(1.1447 * (alpha1 * n) ** (1.0 / 3.0)))
    return max(0, min(lag, n - 2))


def _resolve_lag(spec: HacSpec, u: np.ndarray) -> int:
    if spec.lag is not None:
        return int(spec.lag)
    return plugin_bandwidth(u, spec.pretest_z)


class LongRunVariance(NamedTuple):
    value: float
    lag: int
    degenerate: bool


def nw_long_run_variance(series, spec: HacSpec | None = None) -> LongRunVariance:
    """Bartlett-kernel long-run variance of a series.

    The series is demeaned internally.  The estimate
    ``gamma_0 + 2 sum_{l=1}^{L} (1 - l/(L+1)) gamma_l`` is truncated at zero
    from below; ``degenerate`` reports whether truncation was binding.

    With ``lag=0`` this is exactly the sample variance.
    """
    u = np.asarray(series, dtype=float)
    if u.ndim != 1:
        raise ValidationError("series must be one-dimensional")
    spec = spec or HacSpec()
    n = u.size
    u = u - u.mean()
    lag = _resolve_lag(spec, u)
    if lag >= n - 1:
        raise ValidationError(f"HAC lag {lag} too large for series of length {n}")
    value = kernels.bartlett_lrv(u, lag)
    degenerate = value <= 0.0
    return LongRunVariance(value=max(value, 0.0), lag=lag, degenerate=degenerate)


def _weighted_sum_se(z: np.ndarray, signed_weights: np.ndarray, demean_segments, spec: HacSpec):
    """HAC standard error of sum_t c_t z_t.

    ``demean_segments`` is a list of ``(slice, mean_weights)`` pairs; within
    each segment z is centered at its weighted mean before forming the
    influence series u_t = n * c_t * (z_t - segment mean).
    """
    n = z.size
    centered = np.array(z, dtype=float)
    for seg, mw in demean_segments:
        centered[seg] = centered[seg] - float(mw @ centered[seg])
    u = n * signed_weights * centered
    scale = float(np.max(np.abs(z))) if z.size else 0.0
    if float(np.max(np.abs(u))) <= 1e-12 * n * max(1.0, scale):
        raise InferenceError("degenerate series: no variation around regime means")
    lag = _resolve_lag(spec, u)
    if lag >= n - 1:
        raise ValidationError(f"HAC lag {lag} too large for series of length {n}")
    omega = kernels.bartlett_lrv(u, lag)
    if omega <= 0.0:
        raise InferenceError("degenerate series: zero long-run variance")
    return math.sqrt(omega / n), lag


def attach_inference(
    estimate: AttEstimate,
    panel: Panel,
    wpost=None,
    wpre=None,
    spec: HacSpec | None = None,
    control=0,
    unit="treated",
) -> AttEstimate:
    """Attach a HAC standard error, t-statistic and p-value to a closed-form
    estimate (tdid, demeaned_sc, sc, or ba).

    The point estimate is left untouched.  A degenerate (zero long-run
    variance) series raises :class:`InferenceError`.
    """
    spec = spec or HacSpec()
    rw = panel_regime_weights(panel, wpost, wpre)
    pre, post = panel.pre_slice, panel.post_slice
    name = estimate.estimator
    if name in ("tdid", "demeaned_sc"):
        z = panel.difference(control)
        if name == "demeaned_sc":
            rw = panel_regime_weights(panel, wpost, None)
        segments = [(pre, rw.wpre), (post, rw.wpost)]
        se, lag = _weighted_sum_se(z, rw.omega, segments, spec)
    elif name == "sc":
        z = panel.difference(control)
        coeffs = np.zeros(panel.n_periods)
        coeffs[post] = rw.wpost
        se, lag = _weighted_sum_se(z, coeffs, [(post, rw.wpost)], spec)
    elif name == "ba":
        if isinstance(unit, str) and unit == "treated":
            z = panel.treated
        else:
            z = panel.controls[panel.resolve_control(unit)]
        segments = [(pre, rw.wpre), (post, rw.wpost)]
        se, lag = _weighted_sum_se(z, rw.omega, segments, spec)
    else:
        raise ValidationError(
            f"attach_inference does not handle estimator {name!r}; "
            "regression-based fits attach their own inference"
        )
    return estimate._with_inference(se, lag)


def hac_sandwich(design: np.ndarray, w: np.ndarray, residuals: np.ndarray, gram: np.ndarray, spec: HacSpec | None = None):
    """HAC covariance of weighted-least-squares coefficients.

    Sandwiches the Bartlett long-run covariance of the weighted score series
    ``u_t = w_t x_t r_t`` between inverses of the weighted Gram matrix.
    Returns ``(cov, lag)``.
    """
    spec = spec or HacSpec()
    n = design.shape[0]
    # Bandwidth from the weighted residual series, the dependence carrier
    # shared by every score column.
    lag = _resolve_lag(spec, w * residuals)
    if lag >= n - 1:
        raise ValidationError(f"HAC lag {lag} too large for sample of length {n}")
    scores = design * (w * residuals)[:, None]
    middle = kernels.bartlett_lrv_matrix(np.ascontiguousarray(scores), lag) * n
    ginv_mid = np.linalg.solve(gram, middle)
    cov = np.linalg.solve(gram, ginv_mid.T).T
    return cov, lag


@dataclass(frozen=True)
class TestResult:
    """Outcome of a two-sided asymptotic t-test."""

    statistic: float
    p_value: float
    null_value: float = 0.0
    estimate: float = float("nan")
    se: float = float("nan")

    def reject(self, level: float) -> bool:
        return self.p_value < level

    @property
    def rejections(self) -> dict:
        return {level: self.reject(level) for level in NOMINAL_LEVELS}


def t_test(estimate: AttEstimate, null_value: float = 0.0) -> TestResult:
    """Two-sided t-test of ``point == null_value`` using the HAC SE."""
    if not estimate.has_inference:
        raise InferenceError("estimate has no usable standard error; attach inference first")
    stat = (estimate.point - null_value) / estimate.hac_se
    p = 2.0 * norm.sf(abs(stat))
    return TestResult(
        statistic=float(stat),
        p_value=float(p),
        null_value=float(null_value),
        estimate=estimate.point,
        se=estimate.hac_se,
    )

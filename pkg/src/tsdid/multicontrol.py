"""Multiple-control machinery: per-control estimates, efficient combination,
the over-identifying restrictions test, and pre-trends testing.

With J valid controls there are J estimates of one target; their agreement
is testable (chi-square with J - 1 degrees of freedom) and their
inverse-covariance combination is the most efficient linear pooling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from . import kernels
from .errors import InferenceError, NumericError, ValidationError
from .estimators import AttEstimate, estimate_ba, estimate_sc, estimate_tdid, panel_regime_weights
from .inference import HacSpec, TestResult, attach_inference, plugin_bandwidth, t_test
from .panel import Panel

CONDITION_LIMIT = 1e10


@dataclass(frozen=True)
class AttVector:
    """Per-control treatment-effect estimates with their joint covariance."""

    estimates: np.ndarray
    cov: np.ndarray
    labels: tuple[str, ...]
    n_pre: int
    n_post: int
    bandwidth: int

    @property
    def n_controls(self) -> int:
        return self.estimates.size


@dataclass(frozen=True)
class OveridResult:
    """Efficient combination of per-control estimates and, when computed,
    the over-identifying restrictions statistic."""

    point: float
    variance: float
    weights: np.ndarray
    estimates: np.ndarray
    labels: tuple[str, ...]
    q_stat: float = float("nan")
    df: int = 0
    p_value: float = float("nan")

    @property
    def se(self) -> float:
        return math.sqrt(self.variance)


def _check_positive_definite(cov: np.ndarray, labels) -> None:
    eigvals = np.linalg.eigvalsh(cov)
    if eigvals[0] <= 0 or eigvals[-1] / eigvals[0] > CONDITION_LIMIT:
        # Name the most collinear pair to aid debugging (e.g. duplicated
        # controls produce a perfectly correlated block).
        d = np.sqrt(np.clip(np.diag(cov), 1e-300, np.inf))
        corr = cov / np.outer(d, d)
        np.fill_diagonal(corr, 0.0)
        i, j = np.unravel_index(np.argmax(np.abs(corr)), corr.shape)
        raise NumericError(
            "estimate covariance is singular or near-singular "
            f"(min eig {eigvals[0]:.3g}); most collinear pair: "
            f"{labels[i]!r} and {labels[j]!r} (corr {corr[i, j]:.6f})"
        )


def estimate_vector(panel: Panel, wpost=None, wpre=None, spec: HacSpec | None = None) -> AttVector:
    """DiD estimates for every treated-control pair with their HAC joint
    covariance.

    The covariance is the multivariate Bartlett long-run covariance of the
    stacked regime-demeaned weighted difference series, using one shared
    automatic bandwidth, scaled to the level of the estimates.
    """
    if panel.n_controls < 2:
        raise ValidationError("estimate_vector needs at least 2 control units")
    spec = spec or HacSpec()
    rw = panel_regime_weights(panel, wpost, wpre)
    n = panel.n_periods
    pre, post = panel.pre_slice, panel.post_slice
    points = np.empty(panel.n_controls)
    scores = np.empty((n, panel.n_controls))
    for j in range(panel.n_controls):
        x = panel.difference(j)
        points[j] = rw.omega @ x
        centered = np.array(x)
        centered[pre] -= float(rw.wpre @ x[pre])
        centered[post] -= float(rw.wpost @ x[post])
        scores[:, j] = n * rw.omega * centered
    if spec.lag is not None:
        lag = int(spec.lag)
    else:
        # Shared bandwidth: the largest per-series plugin selection.
        lag = max(plugin_bandwidth(scores[:, j], spec.pretest_z) for j in range(scores.shape[1]))
    if lag >= n - 1:
        raise ValidationError(f"HAC lag {lag} too large for panel of length {n}")
    cov = kernels.bartlett_lrv_matrix(np.ascontiguousarray(scores), lag) / n
    cov = (cov + cov.T) / 2.0
    _check_positive_definite(cov, panel.control_labels)
    return AttVector(
        estimates=points,
        cov=cov,
        labels=panel.control_labels,
        n_pre=panel.n_pre,
        n_post=panel.n_post,
        bandwidth=lag,
    )


def efficient_combine(v: AttVector) -> OveridResult:
    """Minimum-variance linear combination of the per-control estimates.

    The weights ``h* = S^-1 1 / (1' S^-1 1)`` sum to one and attain the
    variance lower bound ``1 / (1' S^-1 1)`` among all sum-to-one
    combinations.
    """
    _check_positive_definite(v.cov, v.labels)
    ones = np.ones(v.n_controls)
    sinv_one = np.linalg.solve(v.cov, ones)
    denom = float(ones @ sinv_one)
    if denom <= 0:
        raise NumericError("covariance produced a non-positive precision total")
    weights = sinv_one / denom
    point = float(weights @ v.estimates)
    return OveridResult(
        point=point,
        variance=1.0 / denom,
        weights=weights,
        estimates=np.array(v.estimates),
        labels=v.labels,
        df=v.n_controls - 1,
    )


def overid_test(v: AttVector) -> OveridResult:
    """Over-identifying restrictions test that all controls target one ATT.

    The quadratic form of deviations from the efficient combination is
    asymptotically chi-square with J - 1 degrees of freedom when every
    control is valid; violations in either the pre- or post-treatment
    period shift it.
    """
    combined = efficient_combine(v)
    dev = v.estimates - combined.point
    q_stat = float(dev @ np.linalg.solve(v.cov, dev))
    q_stat = max(q_stat, 0.0)
    df = v.n_controls - 1
    p_value = float(chi2.sf(q_stat, df))
    return OveridResult(
        point=combined.point,
        variance=combined.variance,
        weights=combined.weights,
        estimates=combined.estimates,
        labels=combined.labels,
        q_stat=q_stat,
        df=df,
        p_value=p_value,
    )


def two_control_difference_test(panel: Panel, wpost=None, wpre=None, spec: HacSpec | None = None) -> TestResult:
    """Identification t-test from exactly two candidate controls.

    The treated unit's outcome cancels from the difference of the two
    per-control DiD estimates, so the statistic is a DiD applied to the two
    control series themselves; under valid identification its mean is zero.
    """
    if panel.n_controls != 2:
        raise ValidationError(
            f"two-control test needs exactly 2 controls, got {panel.n_controls}"
        )
    diff_panel = Panel(
        treated=panel.controls[0],
        controls=(panel.controls[1],),
        n_pre=panel.n_pre,
        n_transition=panel.n_transition,
        n_post=panel.n_post,
        treated_label=panel.control_labels[0],
        control_labels=(panel.control_labels[1],),
    )
    est = estimate_tdid(diff_panel, 0, wpost, wpre)
    est = attach_inference(est, diff_panel, wpost, wpre, spec, control=0)
    return t_test(est, 0.0)


_PSEUDO_ESTIMATORS = ("tdid", "sc", "ba")


def pretrends_test(
    panel: Panel,
    control=0,
    split: int | None = None,
    wpost=None,
    wpre=None,
    spec: HacSpec | None = None,
    estimator: str = "tdid",
) -> TestResult:
    """Pre-trends test on pre-treatment data only.

    The latest ``split`` pre-treatment periods act as a pseudo-post regime
    and the earlier ones as a pseudo-pre regime (default split: half of the
    pre-treatment periods); the chosen estimator is then tested against
    zero.  Violations confined to the post-treatment period are invisible
    to this test by construction.
    """
    if estimator not in _PSEUDO_ESTIMATORS:
        raise ValidationError(f"unknown pre-trends estimator {estimator!r}")
    n_pre = panel.n_pre
    if split is None:
        split = n_pre // 2
    split = int(split)
    if not 2 <= split <= n_pre - 2:
        raise ValidationError(
            f"pre-trends split {split} outside [2, {n_pre - 2}] for {n_pre} pre periods"
        )
    j = panel.resolve_control(control)
    pre = panel.pre_slice
    pseudo = Panel(
        treated=panel.treated[pre],
        controls=(panel.controls[j][pre],),
        n_pre=n_pre - split,
        n_transition=0,
        n_post=split,
        treated_label=panel.treated_label,
        control_labels=(panel.control_labels[j],),
    )
    if estimator == "tdid":
        est = estimate_tdid(pseudo, 0, wpost, wpre)
    elif estimator == "sc":
        est = estimate_sc(pseudo, 0, wpost)
    else:
        est = estimate_ba(pseudo, "treated", wpost, wpre)
    est = attach_inference(est, pseudo, wpost, wpre, spec, control=0)
    return t_test(est, 0.0)


def multi_treated_estimates(panels, wpost=None, wpre=None, spec: HacSpec | None = None) -> list[AttEstimate]:
    """Per-treated-unit efficient estimates for several treated units.

    Each panel holds one treated unit with its own control set; units with a
    single control fall back to the plain DiD.  Results are independent of
    evaluation order.
    """
    results = []
    for panel in panels:
        if panel.n_controls == 1:
            est = estimate_tdid(panel, 0, wpost, wpre)
            try:
                est = attach_inference(est, panel, wpost, wpre, spec, control=0)
            except InferenceError:
                # Degenerate (e.g. noiseless) unit: keep the exact point
                # estimate, leave inference unset.
                pass
        else:
            combined = efficient_combine(estimate_vector(panel, wpost, wpre, spec))
            if combined.variance <= 0:
                raise InferenceError("non-positive combined variance")
            est = AttEstimate(
                point=combined.point,
                estimator="tdid",
                coefficients={
                    f"weight_{lab}": (float(w), float("nan"))
                    for lab, w in zip(combined.labels, combined.weights)
                },
                n_pre=panel.n_pre,
                n_post=panel.n_post,
            )._with_inference(combined.se, None)
        results.append(est)
    return results

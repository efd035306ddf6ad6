"""Point estimators: temporal DiD, single-control SC, and before-after.

All estimators weight post-treatment periods by a convex scheme ``wpost``
and (where applicable) pre-treatment periods by ``wpre``; transition-window
periods contribute nothing.  Inference is attached separately by
:mod:`tsdid.inference`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericError
from .panel import Panel
from .weights import RegimeWeights, WeightingScheme, regime_weights

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class AttEstimate:
    """A treatment-effect estimate with (optional) robust inference.

    ``coefficients`` holds auxiliary regression coefficients as
    ``name -> (value, standard_error)``; standard errors are NaN until
    inference is attached.
    """

    point: float
    estimator: str
    transform: str = "none"
    hac_se: float = float("nan")
    t_stat: float = float("nan")
    p_value: float = float("nan")
    coefficients: dict = field(default_factory=dict)
    n_pre: int = 0
    n_post: int = 0
    bandwidth: int | None = None
    degenerate: bool = False

    @property
    def has_inference(self) -> bool:
        return math.isfinite(self.hac_se) and self.hac_se > 0

    def _with_inference(self, hac_se: float, bandwidth: int | None, degenerate: bool = False):
        from scipy.stats import norm

        t_stat = self.point / hac_se
        p_value = 2.0 * norm.sf(abs(t_stat))
        return replace(
            self,
            hac_se=float(hac_se),
            t_stat=float(t_stat),
            p_value=float(p_value),
            bandwidth=bandwidth,
            degenerate=degenerate,
        )


def _default_schemes(wpost, wpre):
    wpost = wpost if wpost is not None else WeightingScheme.uniform()
    wpre = wpre if wpre is not None else WeightingScheme.uniform()
    return wpost, wpre


def panel_regime_weights(panel: Panel, wpost=None, wpre=None) -> RegimeWeights:
    """Realize schemes over a panel's regime layout."""
    wpost, wpre = _default_schemes(wpost, wpre)
    return regime_weights(panel.n_pre, panel.n_transition, panel.n_post, wpost, wpre)


def estimate_tdid(panel: Panel, control=0, wpost=None, wpre=None) -> AttEstimate:
    """Temporal difference-in-differences point estimate.

    Computes the weighted post-treatment mean of X_t = Y_treated - Y_control
    minus its weighted pre-treatment mean.  Common shocks to both units are
    differenced away exactly.

    Parameters
    ----------
    panel : Panel
    control : int or str
        Control unit (0-based index or label).
    wpost, wpre : WeightingScheme, optional
        Post- and pre-treatment weighting schemes; uniform by default.
    """
    x = panel.difference(control)
    rw = panel_regime_weights(panel, wpost, wpre)
    point = float(rw.omega @ x)
    return AttEstimate(
        point=point, estimator="tdid", n_pre=panel.n_pre, n_post=panel.n_post
    )


def weighted_least_squares(design: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Solve a weighted least-squares problem via the normal equations.

    Returns ``(beta, gram, residuals)`` where ``gram`` is the weighted Gram
    matrix.  Raises :class:`NumericError` when the Gram matrix is singular
    or its condition number exceeds ``CONDITION_LIMIT``.
    """
    wx = design * w[:, None]
    gram = design.T @ wx
    rhs = wx.T @ y
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise NumericError(
            f"weighted Gram matrix is singular or ill-conditioned (cond={cond:.3g})"
        )
    beta = np.linalg.solve(gram, rhs)
    residuals = y - design @ beta
    return beta, gram, residuals


def tdid_design(panel: Panel, control=0, wpost=None, wpre=None):
    """Design, weights and response for the regression form of the DiD.

    The regression is X_t on [1, 1{t >= 1}] with regime weights
    w_T(t) on post- and psi_T(t) on pre-treatment rows.
    """
    x = panel.difference(control)
    rw = panel_regime_weights(panel, wpost, wpre)
    w = np.abs(rw.omega)
    design = np.column_stack([np.ones(panel.n_periods), np.zeros(panel.n_periods)])
    design[panel.post_slice, 1] = 1.0
    return design, w, x


def estimate_tdid_wls(panel: Panel, control=0, wpost=None, wpre=None) -> AttEstimate:
    """DiD via its weighted-regression formulation.

    Minimizes ``sum_t w_n(t) (X_t - b0 - B 1{t>=1})^2``; the indicator
    coefficient equals the closed-form :func:`estimate_tdid` value.
    """
    design, w, x = tdid_design(panel, control, wpost, wpre)
    beta, _, _ = weighted_least_squares(design, x, w)
    return AttEstimate(
        point=float(beta[1]),
        estimator="tdid",
        coefficients={"beta0": (float(beta[0]), float("nan"))},
        n_pre=panel.n_pre,
        n_post=panel.n_post,
    )


def estimate_sc(panel: Panel, control=0, wpost=None) -> AttEstimate:
    """Single-control synthetic-control estimate.

    With one control the convex SC weight is 1, so the estimate is just the
    weighted post-treatment mean of X_t; pre-treatment data are unused.
    Identification requires equal post-treatment untreated means, so any
    level gap between the units is absorbed into the estimate.
    """
    x = panel.difference(control)
    rw = panel_regime_weights(panel, wpost, None)
    point = float(rw.wpost @ x[panel.post_slice])
    return AttEstimate(
        point=point, estimator="sc", n_pre=panel.n_pre, n_post=panel.n_post
    )


def estimate_ba(panel: Panel, unit="treated", wpost=None, wpre=None) -> AttEstimate:
    """Before-after estimate: weighted post- minus pre-treatment mean of one
    unit's own outcome series.

    ``unit`` is ``"treated"`` or a control index/label.  The DiD identity
    ``estimate_tdid = estimate_ba(treated) - estimate_ba(control)`` holds
    exactly.
    """
    if isinstance(unit, str) and unit == "treated":
        y = panel.treated
    else:
        y = panel.controls[panel.resolve_control(unit)]
    rw = panel_regime_weights(panel, wpost, wpre)
    point = float(rw.omega @ y)
    return AttEstimate(
        point=point, estimator="ba", n_pre=panel.n_pre, n_post=panel.n_post
    )


def estimate_demeaned_sc(panel: Panel, control=0, wpost=None) -> AttEstimate:
    """Demeaned single-control SC.

    Fitting the SC on pre-treatment demeaned outcomes forces an intercept
    equal to the pre-treatment mean gap, which makes the estimator a DiD
    with uniform pre-treatment weights.
    """
    est = estimate_tdid(panel, control, wpost, WeightingScheme.uniform())
    return replace(est, estimator="demeaned_sc")

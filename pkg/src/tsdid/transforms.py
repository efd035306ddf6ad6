"""Pre-estimation transforms for unit roots, persistence, and trends.

``first_difference`` removes unit roots; the lag-augmented regression
mitigates high persistence; the trend regression handles deterministic
trends that are not common to both units, with its asymptotic covariance
expressed through the 3x3 matrices ``q_a``, ``q_b`` and ``q_mat``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .estimators import AttEstimate, panel_regime_weights, weighted_least_squares
from .inference import HacSpec, hac_sandwich
from .panel import Panel
from .weights import WeightingScheme

TRANSFORMS = ("none", "first-difference", "ar1-augment", "detrend")


def first_difference(panel: Panel) -> Panel:
    """Panel of first differences, indexed by the later period.

    The pre-treatment count drops by one.  The difference straddling the
    pre/transition boundary is assigned to the (zero-weight) transition
    block rather than to either regime; when the original panel has no
    transition window, a one-period transition block is introduced for it
    and the post count drops by one.
    """
    if panel.n_pre < 3:
        raise ValidationError("first difference needs at least 3 pre-treatment periods")
    if panel.n_transition == 0 and panel.n_post < 3:
        raise ValidationError(
            "first difference needs at least 3 post-treatment periods "
            "when there is no transition window"
        )
    series = [np.diff(panel.treated)] + [np.diff(c) for c in panel.controls]
    if panel.n_transition >= 1:
        n_pre, n_trans, n_post = panel.n_pre - 1, panel.n_transition, panel.n_post
    else:
        n_pre, n_trans, n_post = panel.n_pre - 1, 1, panel.n_post - 1
    return Panel(
        treated=series[0],
        controls=tuple(series[1:]),
        n_pre=n_pre,
        n_transition=n_trans,
        n_post=n_post,
        treated_label=panel.treated_label,
        control_labels=panel.control_labels,
        periods=None if panel.periods is None else panel.periods[1:],
    )


@dataclass(frozen=True)
class RegressionDesign:
    """A weighted regression design aligned with panel rows."""

    matrix: np.ndarray
    weights: np.ndarray
    response: np.ndarray
    columns: tuple[str, ...]
    n_pre: int
    n_post: int


def ar1_augment_design(panel: Panel, control=0, wpost=None, wpre=None, intercept: bool = True) -> RegressionDesign:
    """Weighted design for the lag-augmented regression
    X_t on [1, 1{t>=1}, X_{t-1}].

    The earliest pre-treatment observation is dropped (its lag is not
    observed), so pre-treatment weights are realized over ``n_pre - 1``
    periods.  ``intercept=False`` drops the constant column (used for the
    SC variant, which does not demean).
    """
    if panel.n_pre < 3:
        raise ValidationError("lag augmentation needs at least 3 pre-treatment periods")
    x = panel.difference(control)
    y = x[1:]
    lagged = x[:-1]
    n_rows = y.size
    post_start = panel.n_pre + panel.n_transition - 1
    indicator = np.zeros(n_rows)
    indicator[post_start:] = 1.0
    cols = [indicator, lagged]
    names = ["att", "lag"]
    if intercept:
        cols.insert(0, np.ones(n_rows))
        names.insert(0, "const")
    rw = panel_regime_weights(_shifted_layout(panel), wpost, wpre)
    return RegressionDesign(
        matrix=np.column_stack(cols),
        weights=np.abs(rw.omega),
        response=y,
        columns=tuple(names),
        n_pre=panel.n_pre - 1,
        n_post=panel.n_post,
    )


def _shifted_layout(panel: Panel) -> Panel:
    """Panel-shaped layout with the first pre-treatment row removed."""
    return Panel(
        treated=panel.treated[1:],
        controls=tuple(c[1:] for c in panel.controls),
        n_pre=panel.n_pre - 1,
        n_transition=panel.n_transition,
        n_post=panel.n_post,
        treated_label=panel.treated_label,
        control_labels=panel.control_labels,
    )


def fit_ar1_augment(panel: Panel, control=0, wpost=None, wpre=None, spec: HacSpec | None = None, intercept: bool = True) -> AttEstimate:
    """Estimate the treatment effect controlling for the lagged outcome.

    Reports the post-indicator coefficient as the ATT (the layout used in
    the empirical tables) together with the lag coefficient, both with HAC
    sandwich standard errors.  Callers interested in the long-run effect can
    rescale by ``1 / (1 - beta1)`` using the exposed lag coefficient.
    """
    design = ar1_augment_design(panel, control, wpost, wpre, intercept=intercept)
    try:
        beta, gram, resid = weighted_least_squares(design.matrix, design.response, design.weights)
    except NumericError as exc:
        raise NumericError(f"lag-augmented regression failed: {exc}") from exc
    cov, lag = hac_sandwich(design.matrix, design.weights, resid, gram, spec)
    ses = np.sqrt(np.clip(np.diag(cov), 0.0, np.inf))
    idx = {name: i for i, name in enumerate(design.columns)}
    coeffs = {"beta1": (float(beta[idx["lag"]]), float(ses[idx["lag"]]))}
    if intercept:
        coeffs["beta0"] = (float(beta[idx["const"]]), float(ses[idx["const"]]))
    est = AttEstimate(
        point=float(beta[idx["att"]]),
        estimator="tdid" if intercept else "sc",
        transform="ar1-augment",
        coefficients=coeffs,
        n_pre=design.n_pre,
        n_post=design.n_post,
    )
    se = float(ses[idx["att"]])
    if se <= 0:
        raise NumericError("degenerate HAC covariance in lag-augmented regression")
    return est._with_inference(se, lag)


def q_a(lam: float) -> np.ndarray:
    """Limit of the weighted Gram matrix of [1, 1{t>=1}, t~/n] under uniform
    regime weighting, as a function of the post-share lambda."""
    return np.array(
        [
            [2.0, 1.0, (3.0 - 2.0 * lam) / 2.0],
            [1.0, 1.0, (2.0 - lam) / 2.0],
            [
                (3.0 - 2.0 * lam) / 2.0,
                (2.0 - lam) / 2.0,
                (2.0 * lam * lam - 5.0 * lam + 4.0) / 3.0,
            ],
        ]
    )


def q_b(lam: float, sigma2: float = 1.0) -> np.ndarray:
    """Reference form of the limit covariance of the scaled weighted score
    vector (uniform regime weights, conditionally homoskedastic errors).

    Note: the (3,3) entry of this reference form overstates the exact limit
    of the score covariance by a factor of 6; :func:`q_b_score` carries the
    exact value and is what the trend-regression inference uses.  This form
    is kept for reproducing the reference eigenvalue scan.
    """
    return sigma2 * np.array(
        [
            [1.0 / (lam * (1.0 - lam)), 1.0 / lam, 1.0 / lam],
            [1.0 / lam, 1.0 / lam, (2.0 - lam) / (2.0 * lam)],
            [1.0 / lam, (2.0 - lam) / (2.0 * lam), 2.0 * (3.0 - 2.0 * lam) / lam],
        ]
    )


def q_b_score(lam: float, sigma2: float = 1.0) -> np.ndarray:
    """Exact limit of the scaled score covariance n * sum w~^2 x x' sigma2.

    Identical to :func:`q_b` except for the (3,3) entry, whose exact limit
    is sigma2 * (1/lam - 2/3); verifiable against the finite-n sum directly.
    """
    out = q_b(lam, sigma2)
    out[2, 2] = sigma2 * (1.0 / lam - 2.0 / 3.0)
    return out


def q_mat(lam: float, sigma2: float = 1.0) -> np.ndarray:
    """Sandwich limit Q = Q_A^-1 Q_B Q_A^-1 for the trend regression."""
    a = q_a(lam)
    b = q_b(lam, sigma2)
    a_inv = np.linalg.inv(a)
    return a_inv @ b @ a_inv


LAMBDA_EPS = 1e-6


def _check_lambda(lam: float) -> float:
    if not LAMBDA_EPS <= lam <= 1.0 - LAMBDA_EPS:
        raise ValidationError(
            f"post-treatment share lambda={lam:.3g} outside "
            f"[{LAMBDA_EPS}, {1 - LAMBDA_EPS}]"
        )
    return float(lam)


@dataclass(frozen=True)
class TrendMatrices:
    lam: float
    qa: np.ndarray
    qb: np.ndarray
    q: np.ndarray


def trend_matrices(lam: float, sigma2: float = 1.0) -> TrendMatrices:
    lam = _check_lambda(lam)
    return TrendMatrices(lam=lam, qa=q_a(lam), qb=q_b(lam, sigma2), q=q_mat(lam, sigma2))


def detrend_design(panel: Panel, control=0, wpost=None, wpre=None) -> RegressionDesign:
    """Weighted design for the trend regression X_t on [1, 1{t>=1}, t~/n].

    Only the uniform weighting scheme is supported: the covariance limits
    ``q_a``/``q_b`` are derived under uniform regime weights, and the
    appropriate scaling for other schemes is scheme-specific.  The scaled
    trend regressor is the global period position divided by n.
    """
    for scheme, side in ((wpost, "post"), (wpre, "pre")):
        if scheme is not None and scheme.kind != "uniform":
            raise ValidationError(
                f"trend regression requires uniform {side}-treatment weights, "
                f"got {scheme}"
            )
    n = panel.n_pre + panel.n_post
    _check_lambda(panel.n_post / n)
    x = panel.difference(control)
    n_rows = panel.n_periods
    position = np.arange(1, n_rows + 1, dtype=float)
    indicator = np.zeros(n_rows)
    indicator[panel.post_slice] = 1.0
    design = np.column_stack([np.ones(n_rows), indicator, position / n])
    rw = panel_regime_weights(panel, WeightingScheme.uniform(), WeightingScheme.uniform())
    return RegressionDesign(
        matrix=design,
        weights=np.abs(rw.omega),
        response=x,
        columns=("const", "att", "trend_scaled"),
        n_pre=panel.n_pre,
        n_post=panel.n_post,
    )


def fit_detrend(panel: Panel, control=0, wpost=None, wpre=None, spec: HacSpec | None = None) -> AttEstimate:
    """Estimate the treatment effect controlling for a linear time trend.

    Coefficient standard errors come from the model-based limit covariance
    Q(lambda)/n with the error variance estimated from the weighted squared
    residuals; the ATT standard error is sqrt(e2' Q(lambda) e2 / n).
    """
    design = detrend_design(panel, control, wpost, wpre)
    beta, _, resid = weighted_least_squares(design.matrix, design.response, design.weights)
    n = panel.n_pre + panel.n_post
    lam = panel.n_post / n
    # Mean squared residual under regime weights; each regime's weights sum
    # to one, so the normalization is the total weight 2.
    sigma2 = float(design.weights @ (resid**2)) / 2.0
    if sigma2 <= 0:
        raise NumericError("zero residual variance in trend regression")
    a_inv = np.linalg.inv(q_a(lam))
    q_exact = a_inv @ q_b_score(lam, sigma2) @ a_inv
    ses = np.sqrt(np.diag(q_exact) / n)
    est = AttEstimate(
        point=float(beta[1]),
        estimator="tdid",
        transform="detrend",
        coefficients={
            "beta0": (float(beta[0]), float(ses[0])),
            "trend": (float(beta[2]) / n, float(ses[2]) / n),
        },
        n_pre=panel.n_pre,
        n_post=panel.n_post,
    )
    return est._with_inference(float(ses[1]), None)


def min_eig_scan(grid, sigma2: float = 1.0) -> np.ndarray:
    """Minimum eigenvalues of Q_A, Q_B and Q over a lambda grid.

    Returns an array with columns (lambda, mineig_qa, mineig_qb, mineig_q),
    ready for plotting or CSV emission.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValidationError("lambda grid is empty")
    out = np.empty((grid.size, 4))
    for i, lam in enumerate(grid):
        mats = trend_matrices(float(lam), sigma2)
        out[i, 0] = lam
        out[i, 1] = np.linalg.eigvalsh(mats.qa)[0]
        out[i, 2] = np.linalg.eigvalsh(mats.qb)[0]
        out[i, 3] = np.linalg.eigvalsh(mats.q)[0]
    return out

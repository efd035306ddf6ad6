"""One-call estimation: estimator x transform x inference dispatch.

This is the entry point used by the CLI and the Monte Carlo harness.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .errors import ValidationError
from .estimators import (
    AttEstimate,
    estimate_ba,
    estimate_demeaned_sc,
    estimate_sc,
    estimate_tdid,
)
from .inference import HacSpec, attach_inference
from .panel import Panel
from .transforms import first_difference, fit_ar1_augment, fit_detrend
from .weights import WeightingScheme

ESTIMATORS = ("tdid", "sc", "ba", "demeaned_sc")


def fit_estimate(
    panel: Panel,
    estimator: str = "tdid",
    transform: str = "none",
    control=0,
    wpost=None,
    wpre=None,
    spec: HacSpec | None = None,
) -> AttEstimate:
    """Estimate a treatment effect with robust inference attached.

    ``transform`` is one of none / first-difference / ar1-augment / detrend.
    The lag-augmented SC variant keeps the no-demeaning character of the SC
    by dropping the intercept; the detrend transform is defined for the DiD
    and BA only.
    """
    if estimator not in ESTIMATORS:
        raise ValidationError(f"unknown estimator {estimator!r}")

    if transform == "first-difference":
        panel = first_difference(panel)
        transform_tag = "first-difference"
    elif transform in ("none", "ar1-augment", "detrend"):
        transform_tag = transform
    else:
        raise ValidationError(f"unknown transform {transform!r}")

    if estimator == "demeaned_sc":
        # Defined as the DiD with uniform pre-treatment weights.
        wpre = WeightingScheme.uniform()

    if transform == "ar1-augment":
        if estimator in ("tdid", "demeaned_sc"):
            est = fit_ar1_augment(panel, control, wpost, wpre, spec, intercept=True)
            return replace(est, estimator=estimator)
        if estimator == "sc":
            return fit_ar1_augment(panel, control, wpost, wpre, spec, intercept=False)
        # BA controls for the lag of the unit's own outcome: run the
        # regression on the treated series itself (zero pseudo-control).
        unit_panel = panel.with_series(panel.treated, (np.zeros(panel.n_periods),))
        est = fit_ar1_augment(unit_panel, 0, wpost, wpre, spec, intercept=True)
        return replace(est, estimator="ba")

    if transform == "detrend":
        if estimator in ("tdid", "demeaned_sc"):
            est = fit_detrend(panel, control, wpost, wpre, spec)
            return replace(est, estimator=estimator)
        if estimator == "ba":
            unit_panel = panel.with_series(panel.treated, (np.zeros(panel.n_periods),))
            est = fit_detrend(unit_panel, 0, wpost, wpre, spec)
            return replace(est, estimator="ba")
        raise ValidationError(
            "the trend regression is not defined for the post-only SC estimator"
        )

    if estimator == "tdid":
        est = estimate_tdid(panel, control, wpost, wpre)
    elif estimator == "demeaned_sc":
        est = estimate_demeaned_sc(panel, control, wpost)
    elif estimator == "sc":
        est = estimate_sc(panel, control, wpost)
    else:
        est = estimate_ba(panel, "treated", wpost, wpre)
    est = attach_inference(est, panel, wpost, wpre, spec, control=control)
    return replace(est, transform=transform_tag)

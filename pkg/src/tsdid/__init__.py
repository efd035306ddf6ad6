"""Treatment-effect estimation for panels with one treated unit, few
controls, and many pre/post-treatment periods.

The temporal DiD estimator compares weighted post- and pre-treatment means
of the treated-minus-control outcome gap; rival estimators (single-control
synthetic control, before-after), HAC inference, identification tests, and
a Monte Carlo engine round out the toolkit.
"""

__version__ = "0.1.0"

from .dgp import DgpSpec, SimulatedPanel, generate, preset, preset_names, substream, true_att
from .errors import (
    DataSourceError,
    InferenceError,
    NumericError,
    TsdidError,
    ValidationError,
)
from .estimators import (
    AttEstimate,
    estimate_ba,
    estimate_demeaned_sc,
    estimate_sc,
    estimate_tdid,
    estimate_tdid_wls,
)
from .fitting import fit_estimate
from .inference import HacSpec, TestResult, attach_inference, nw_long_run_variance, t_test
from .kernels import backend_name
from .montecarlo import McConfig, McReport, run_power_curve, run_table
from .multicontrol import (
    AttVector,
    OveridResult,
    efficient_combine,
    estimate_vector,
    multi_treated_estimates,
    overid_test,
    pretrends_test,
    two_control_difference_test,
)
from .panel import Panel
from .transforms import (
    first_difference,
    fit_ar1_augment,
    fit_detrend,
    min_eig_scan,
    q_a,
    q_b,
    q_mat,
    trend_matrices,
)
from .weights import RegimeWeights, WeightingScheme, realize_weights, regime_weights

__all__ = [
    "AttEstimate",
    "AttVector",
    "DataSourceError",
    "DgpSpec",
    "HacSpec",
    "InferenceError",
    "McConfig",
    "McReport",
    "NumericError",
    "OveridResult",
    "Panel",
    "RegimeWeights",
    "SimulatedPanel",
    "TestResult",
    "TsdidError",
    "ValidationError",
    "WeightingScheme",
    "attach_inference",
    "backend_name",
    "efficient_combine",
    "estimate_ba",
    "estimate_demeaned_sc",
    "estimate_sc",
    "estimate_tdid",
    "estimate_tdid_wls",
    "estimate_vector",
    "first_difference",
    "fit_ar1_augment",
    "fit_detrend",
    "fit_estimate",
    "generate",
    "min_eig_scan",
    "multi_treated_estimates",
    "nw_long_run_variance",
    "overid_test",
    "preset",
    "preset_names",
    "pretrends_test",
    "q_a",
    "q_b",
    "q_mat",
    "realize_weights",
    "regime_weights",
    "run_power_curve",
    "run_table",
    "substream",
    "t_test",
    "trend_matrices",
    "true_att",
    "two_control_difference_test",
]

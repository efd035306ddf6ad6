import numpy as np
import pytest

from tsdid.panel import Panel
from tsdid.weights import WeightingScheme


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_panel(rng, n_pre=8, n_transition=1, n_post=8, n_controls=1, scale=1.0, shift=0.0):
    n = n_pre + n_transition + n_post
    treated = shift + scale * rng.standard_normal(n)
    controls = tuple(scale * rng.standard_normal(n) for _ in range(n_controls))
    return Panel(
        treated=treated,
        controls=controls,
        n_pre=n_pre,
        n_transition=n_transition,
        n_post=n_post,
    )


def random_scheme(rng, horizon=None):
    """Random valid weighting scheme; custom vectors need a fixed horizon."""
    kind = rng.integers(0, 3 if horizon is not None else 2)
    if kind == 0:
        return WeightingScheme.uniform()
    if kind == 1:
        return WeightingScheme.linear_decay(float(rng.uniform(0.0, 0.5)))
    vec = rng.uniform(0.5, 1.5, size=horizon)
    return WeightingScheme.custom(vec / vec.sum())


@pytest.fixture
def panel_factory(rng):
    def factory(**kwargs):
        return make_panel(rng, **kwargs)

    return factory

import numpy as np
import pytest

from tsdid.errors import ValidationError
from tsdid.weights import WeightingScheme, realize_weights, regime_weights


def test_uniform_weights():
    assert np.allclose(realize_weights(WeightingScheme.uniform(), 4), [0.25] * 4)


def test_linear_decay_zero_is_uniform():
    w = realize_weights(WeightingScheme.linear_decay(0.0), 3)
    assert np.allclose(w, [1 / 3] * 3)


def test_linear_decay_direct_evaluation():
    # (H - 2*a*t) at a=0.25, H=2: (1.5, 1.0) normalized.
    w = realize_weights(WeightingScheme.linear_decay(0.25), 2)
    assert np.allclose(w, [0.6, 0.4])


@pytest.mark.parametrize("a", [-0.01, 0.5, 0.7])
def test_linear_decay_parameter_range(a):
    with pytest.raises(ValidationError):
        WeightingScheme.linear_decay(a)


def test_custom_negative_entry_rejected():
    with pytest.raises(ValidationError):
        WeightingScheme.custom([0.5, -0.1, 0.6])


def test_custom_zero_sum_rejected():
    with pytest.raises(ValidationError):
        WeightingScheme.custom([0.0, 0.0])


def test_custom_renormalized_with_warning():
    with pytest.warns(UserWarning):
        scheme = WeightingScheme.custom([1.0, 1.0, 2.0])
    w = realize_weights(scheme, 3)
    assert np.allclose(w, [0.25, 0.25, 0.5])
    assert abs(w.sum() - 1.0) < 1e-12


def test_custom_wrong_horizon():
    scheme = WeightingScheme.custom([0.5, 0.5])
    with pytest.raises(ValidationError):
        realize_weights(scheme, 3)


@pytest.mark.parametrize("horizon", [1, 2, 7, 40])
@pytest.mark.parametrize(
    "scheme",
    [WeightingScheme.uniform(), WeightingScheme.linear_decay(0.3), WeightingScheme.linear_decay(0.49)],
)
def test_weights_sum_to_one_and_nonnegative(scheme, horizon):
    w = realize_weights(scheme, horizon)
    assert w.size == horizon
    assert np.all(w >= 0)
    assert abs(w.sum() - 1.0) <= 1e-12


def test_concentration_bound_enforced():
    # All mass on one period out of many violates H*max(w) <= 8.
    vec = np.zeros(16)
    vec[0] = 1.0
    scheme = WeightingScheme.custom(vec)
    with pytest.raises(ValidationError):
        realize_weights(scheme, 16)
    # A wider bound admits it.
    loose = WeightingScheme.custom(vec, concentration_bound=16)
    assert realize_weights(loose, 16)[0] == 1.0


def test_concentration_bound_uniform_and_decay_pass():
    for scheme in (WeightingScheme.uniform(), WeightingScheme.linear_decay(0.49)):
        for horizon in (2, 10, 1000):
            w = realize_weights(scheme, horizon)
            assert horizon * w.max() <= 8.0


def test_regime_weights_structure():
    rw = regime_weights(3, 2, 4, WeightingScheme.uniform(), WeightingScheme.linear_decay(0.25))
    assert rw.omega.size == 9
    # Transition block gets exactly zero weight.
    assert np.all(rw.omega[3:5] == 0.0)
    assert abs(rw.omega[5:].sum() - 1.0) < 1e-12
    assert abs(rw.omega[:3].sum() + 1.0) < 1e-12
    # Chronological pre ordering: the latest pre period carries most weight.
    assert rw.wpre[-1] == rw.wpre.max()


def test_horizon_must_be_positive():
    with pytest.raises(ValidationError):
        realize_weights(WeightingScheme.uniform(), 0)

import numpy as np
import pytest

from conftest import make_panel
from tsdid.dgp import substream
from tsdid.errors import NumericError, ValidationError
from tsdid.estimators import estimate_tdid_wls
from tsdid.panel import Panel
from tsdid.transforms import (
    ar1_augment_design,
    detrend_design,
    first_difference,
    fit_ar1_augment,
    fit_detrend,
    min_eig_scan,
    q_a,
    q_b,
    q_b_score,
    q_mat,
    trend_matrices,
)
from tsdid.weights import WeightingScheme


def cubic_eigvals(m):
    """Characteristic-polynomial oracle for symmetric 3x3 eigenvalues."""
    a, b, c = m[0, 0], m[1, 1], m[2, 2]
    d, e, f = m[0, 1], m[0, 2], m[1, 2]
    # det(m - x I) = -x^3 + tr x^2 - s2 x + det
    tr = a + b + c
    s2 = a * b + a * c + b * c - d * d - e * e - f * f
    det = np.linalg.det(m)
    roots = np.roots([-1.0, tr, -s2, det])
    return np.sort(roots.real)


def ramp_panel(n_pre=6, n_post=6):
    n = n_pre + 1 + n_post
    t = np.arange(n, dtype=float)
    return Panel(treated=t, controls=(np.zeros(n),), n_pre=n_pre, n_transition=1, n_post=n_post)


class TestFirstDifference:
    def test_ramp_becomes_constant(self):
        out = first_difference(ramp_panel())
        assert np.allclose(out.treated, 1.0)

    def test_random_walk_recovers_innovations(self, rng):
        eps = rng.standard_normal(20)
        walk = np.cumsum(eps)
        panel = Panel(treated=walk, controls=(np.zeros(20),), n_pre=9, n_transition=1, n_post=10)
        out = first_difference(panel)
        assert np.allclose(out.treated, eps[1:])

    def test_bookkeeping_with_transition(self, rng):
        panel = make_panel(rng, n_pre=7, n_transition=2, n_post=6)
        out = first_difference(panel)
        assert (out.n_pre, out.n_transition, out.n_post) == (6, 2, 6)
        assert out.n_periods == panel.n_periods - 1

    def test_bookkeeping_without_transition(self, rng):
        # The boundary-straddling difference lands in a fresh zero-weight
        # transition slot.
        panel = make_panel(rng, n_pre=7, n_transition=0, n_post=6)
        out = first_difference(panel)
        assert (out.n_pre, out.n_transition, out.n_post) == (6, 1, 5)

    def test_too_short_rejected(self, rng):
        panel = make_panel(rng, n_pre=2, n_transition=1, n_post=5)
        with pytest.raises(ValidationError):
            first_difference(panel)


class TestAr1Augment:
    def test_exact_linear_system(self):
        # Noiseless X_t = 1 + 2*1{t>=1} + 0.5 X_{t-1} recovered exactly.
        n_pre, n_post = 8, 8
        n = n_pre + 1 + n_post
        post = np.zeros(n)
        post[n_pre + 1 :] = 1.0
        x = np.empty(n)
        x[0] = 2.0  # steady-ish start
        for t in range(1, n):
            x[t] = 1.0 + 2.0 * post[t] + 0.5 * x[t - 1]
        panel = Panel(treated=x, controls=(np.zeros(n),), n_pre=n_pre, n_transition=1, n_post=n_post)
        est = fit_ar1_augment(panel)
        assert est.point == pytest.approx(2.0, abs=1e-10)
        assert est.coefficients["beta0"][0] == pytest.approx(1.0, abs=1e-10)
        assert est.coefficients["beta1"][0] == pytest.approx(0.5, abs=1e-10)
        assert est.n_pre == n_pre - 1

    def test_reduces_to_wls_when_lag_coefficient_zero(self):
        # Noiseless data with beta1 = 0: the augmented fit equals the plain
        # weighted regression.
        n_pre, n_post = 7, 7
        n = n_pre + 1 + n_post
        x = np.full(n, 0.8)
        x[n_pre + 1 :] += 1.3
        panel = Panel(treated=x, controls=(np.zeros(n),), n_pre=n_pre, n_transition=1, n_post=n_post)
        aug = fit_ar1_augment(panel)
        wls = estimate_tdid_wls(panel)
        assert aug.point == pytest.approx(wls.point, abs=1e-8)

    def test_constant_series_collinearity(self):
        n = 15
        panel = Panel(treated=np.ones(n), controls=(np.zeros(n),), n_pre=7, n_transition=1, n_post=7)
        with pytest.raises(NumericError):
            fit_ar1_augment(panel)

    def test_design_alignment(self, rng):
        panel = make_panel(rng, n_pre=5, n_transition=1, n_post=4)
        design = ar1_augment_design(panel)
        x = panel.difference(0)
        # Row t pairs X_t with X_{t-1}.
        assert np.allclose(design.response, x[1:])
        assert np.allclose(design.matrix[:, 2], x[:-1])
        # Weights: dropped first pre period, zero transition weight.
        assert design.weights[: panel.n_pre - 1].sum() == pytest.approx(1.0)
        assert design.weights[panel.n_pre - 1] == 0.0
        assert design.weights[panel.n_pre :].sum() == pytest.approx(1.0)


class TestTrendMatrices:
    def test_qa_half_closed_form(self):
        want = np.array([[2, 1, 1], [1, 1, 0.75], [1, 0.75, 2 / 3]])
        assert np.allclose(q_a(0.5), want, atol=1e-15)

    def test_qb_half_closed_form(self):
        want = np.array([[4, 2, 2], [2, 2, 1.5], [2, 1.5, 8]])
        assert np.allclose(q_b(0.5, 1.0), want, atol=1e-15)

    def test_qb_score_matches_finite_sum(self):
        # Exact n * sum w~^2 x x' for a concrete layout converges to the
        # score-covariance limit.
        n_pre = n_post = 400
        n = n_pre + n_post
        tt = np.arange(1, n + 1, dtype=float)
        w = np.where(tt <= n_pre, 1 / n_pre, 1 / n_post)
        post = (tt > n_pre).astype(float)
        design = np.column_stack([np.ones(n), post, tt / n])
        exact = n * (design * (w**2)[:, None]).T @ design
        assert np.allclose(exact, q_b_score(0.5), atol=0.02)

    def test_symmetry_and_formula_recheck(self):
        for lam in np.linspace(0.05, 0.95, 19):
            a = q_a(lam)
            assert np.allclose(a, a.T, atol=1e-14)
            assert a[2, 2] == pytest.approx((2 * lam**2 - 5 * lam + 4) / 3, abs=1e-14)
            b = q_b(lam)
            assert np.allclose(b, b.T, atol=1e-14)

    def test_min_eig_scan_strictly_positive(self):
        grid = np.linspace(1e-6, 1 - 1e-6, 500)
        table = min_eig_scan(grid)
        assert table.shape == (500, 4)
        assert np.all(table[:, 1:] > 0)

    def test_eigvals_match_char_poly_oracle(self):
        for lam in (1e-6, 0.2, 0.5, 0.9, 1 - 1e-6):
            mats = trend_matrices(lam)
            for m in (mats.qa, mats.qb, mats.q):
                got = np.linalg.eigvalsh(m)
                want = cubic_eigvals(m)
                assert np.allclose(got, want, rtol=1e-8, atol=1e-9 * np.abs(m).max())

    def test_extreme_lambda_finite(self):
        mats = trend_matrices(1e-6)
        assert np.isfinite(mats.qb).all()
        assert np.linalg.eigvalsh(mats.qb)[0] > 0

    def test_sqrt_factorization_consistency(self):
        # Q = A^-1 B A^-1 equals (A^-1 B^1/2)(A^-1 B^1/2)'.
        from scipy.linalg import sqrtm

        for lam in np.linspace(0.05, 0.95, 10):
            a_inv = np.linalg.inv(q_a(lam))
            b = q_b(lam)
            half = a_inv @ sqrtm(b)
            assert np.allclose(half @ half.T, q_mat(lam), rtol=1e-10, atol=1e-10)

    def test_lambda_range_validated(self):
        with pytest.raises(ValidationError):
            trend_matrices(0.0)
        with pytest.raises(ValidationError):
            trend_matrices(1.0)
        with pytest.raises(ValidationError):
            min_eig_scan([])


class TestDetrend:
    def test_noiseless_recovery(self):
        n_pre = n_post = 20
        n_all = n_pre + 1 + n_post
        n = n_pre + n_post
        pos = np.arange(1, n_all + 1, dtype=float)
        post = np.zeros(n_all)
        post[n_pre + 1 :] = 1.0
        x = 0.25 + 1.0 * post + 0.3 * pos / n
        panel = Panel(treated=x, controls=(np.zeros(n_all),), n_pre=n_pre, n_transition=1, n_post=n_post)
        est = fit_detrend(panel)
        assert est.point == pytest.approx(1.0, abs=1e-10)
        assert est.coefficients["beta0"][0] == pytest.approx(0.25, abs=1e-10)
        # Per-period slope: coefficient on pos/n divided by n.
        assert est.coefficients["trend"][0] == pytest.approx(0.3 / n, abs=1e-12)

    def test_non_uniform_weights_rejected(self, rng):
        panel = make_panel(rng, n_pre=10, n_post=10)
        with pytest.raises(ValidationError):
            detrend_design(panel, wpost=WeightingScheme.linear_decay(0.3))

    def test_t_statistic_calibration(self):
        # Normality of the trend-regression ATT estimate: rejection of the
        # true coefficient near the nominal 5% level (n = 400, lambda = 1/2).
        reps = 2000
        n_pre = n_post = 200
        n = n_pre + n_post
        n_all = n + 1
        pos = np.arange(1, n_all + 1, dtype=float)
        post = np.zeros(n_all)
        post[n_pre + 1 :] = 1.0
        base = 0.4 + 1.0 * post + 0.3 * pos / n
        rej = 0
        for rep in range(reps):
            rng = substream(41, rep)
            x = base + rng.standard_normal(n_all)
            panel = Panel(
                treated=x, controls=(np.zeros(n_all),), n_pre=n_pre, n_transition=1, n_post=n_post
            )
            est = fit_detrend(panel)
            rej += abs((est.point - 1.0) / est.hac_se) > 1.959963984540054
        assert 0.03 <= rej / reps <= 0.07

    def test_differenced_random_walk_passes_adf(self):
        # n = 200 random walks: after differencing, the unit-root null is
        # rejected at 5% in at least 90% of draws.
        from tsdid.diagnostics import adf_test

        reps = 500
        hits = 0
        for rep in range(reps):
            rng = substream(43, rep)
            walk = np.cumsum(rng.standard_normal(200))
            panel = Panel(
                treated=walk, controls=(np.zeros(200),), n_pre=99, n_transition=1, n_post=100
            )
            diffed = first_difference(panel)
            hits += adf_test(diffed.treated).p_value < 0.05
        assert hits / reps >= 0.90

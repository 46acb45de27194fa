import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from flowlab.core import (
    ConfigError,
    GaussianMixtureTarget,
    TimeGrid,
    interpolant_variance,
    marginal_logpdf_xt,
    marginal_pdf_xt,
    rng,
    sample_interpolant,
    sample_target,
)


class TestTargetConstruction:
    def test_weights_renormalized_exactly(self):
        t = GaussianMixtureTarget(
            dim=1,
            weights=np.array([0.3 + 2e-9, 0.7]),
            means=np.array([[1.0], [-1.0]]),
            sigma=1.0,
        )
        assert t.weights.sum() == 1.0

    def test_weights_sum_violation_rejected(self):
        with pytest.raises(ConfigError):
            GaussianMixtureTarget(
                dim=1,
                weights=np.array([0.3, 0.69]),
                means=np.array([[1.0], [-1.0]]),
                sigma=1.0,
            )

    @pytest.mark.parametrize("bad", [0.0, -0.5, np.nan, np.inf])
    def test_bad_sigma_rejected(self, bad):
        with pytest.raises(ConfigError):
            GaussianMixtureTarget(
                dim=1, weights=np.array([1.0]), means=np.zeros((1, 1)), sigma=bad
            )

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(ConfigError):
            GaussianMixtureTarget(
                dim=1,
                weights=np.array([1.5, -0.5]),
                means=np.array([[0.0], [1.0]]),
                sigma=1.0,
            )

    def test_mean_shape_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            GaussianMixtureTarget(
                dim=2, weights=np.array([1.0]), means=np.zeros((1, 3)), sigma=1.0
            )

    def test_means_recentered_and_shift_recorded(self):
        t = GaussianMixtureTarget(
            dim=1,
            weights=np.array([0.3, 0.7]),
            means=np.array([[-1.0], [0.5]]),
            sigma=0.5,
        )
        # mixture mean 0.3*(-1) + 0.7*0.5 = 0.05 moves onto the means
        assert t.center_shift == pytest.approx([0.05], abs=1e-15)
        assert t.means[:, 0] == pytest.approx([-1.05, 0.45], abs=1e-15)
        assert (t.weights @ t.means).item() == pytest.approx(0.0, abs=1e-15)
        assert t.radius == pytest.approx(1.05)

    def test_centered_means_untouched(self):
        t = GaussianMixtureTarget(
            dim=2,
            weights=np.array([0.5, 0.5]),
            means=np.array([[1.0, 0.0], [-1.0, 0.0]]),
            sigma=0.5,
        )
        assert np.all(t.center_shift == 0.0)
        assert t.radius == 1.0

    def test_covariance_matches_sample_covariance(self, mixture_d2):
        xs = sample_target(mixture_d2, 200_000, seed=11)
        emp = np.cov(xs.T)
        assert np.allclose(emp, mixture_d2.covariance(), atol=2e-2)

    def test_config_roundtrip(self, mixture_d1):
        clone = GaussianMixtureTarget.from_config(mixture_d1.to_config())
        assert clone.dim == mixture_d1.dim
        assert np.array_equal(clone.weights, mixture_d1.weights)
        assert np.array_equal(clone.means, mixture_d1.means)
        assert clone.sigma == mixture_d1.sigma

    def test_from_config_missing_key(self):
        with pytest.raises(ConfigError):
            GaussianMixtureTarget.from_config({"dim": 1, "weights": [1.0]})

    def test_standard_gaussian(self):
        t = GaussianMixtureTarget.standard_gaussian(3)
        assert t.n_components == 1
        assert t.radius == 0.0
        assert np.array_equal(t.covariance(), np.eye(3))


class TestRng:
    def test_same_seed_same_stream(self):
        assert np.array_equal(rng(42).standard_normal(10), rng(42).standard_normal(10))

    def test_different_seeds_differ(self):
        assert not np.array_equal(rng(0).standard_normal(10), rng(1).standard_normal(10))

    def test_counter_based_bit_generator(self):
        assert type(rng(0).bit_generator).__name__ == "Philox"


class TestTimeGrid:
    def test_make_uniform_knots(self):
        grid = TimeGrid.make_uniform(4, t_floor=0.2)
        assert grid.n_steps == 4
        assert grid.horizon == pytest.approx(0.8)
        assert grid.knots == pytest.approx([0.0, 0.2, 0.4, 0.6, 0.8])
        assert grid.uniform and grid.step == pytest.approx(0.2)

    def test_must_start_at_zero(self):
        with pytest.raises(ConfigError):
            TimeGrid(knots=np.array([0.1, 0.5, 1.0]), uniform=False, step=float("nan"))

    def test_must_be_increasing(self):
        with pytest.raises(ConfigError):
            TimeGrid(knots=np.array([0.0, 0.5, 0.5]), uniform=False, step=float("nan"))

    def test_must_end_at_or_before_one(self):
        with pytest.raises(ConfigError):
            TimeGrid(knots=np.array([0.0, 1.5]), uniform=False, step=float("nan"))

    def test_uniform_flag_checked(self):
        with pytest.raises(ConfigError):
            TimeGrid(knots=np.array([0.0, 0.1, 0.5]), uniform=True, step=0.1)

    def test_nonuniform_allowed(self):
        grid = TimeGrid(knots=np.array([0.0, 0.1, 0.5, 0.9]), uniform=False, step=float("nan"))
        assert grid.n_steps == 3

    @pytest.mark.parametrize("bad_floor", [-0.1, 1.0, 1.5])
    def test_bad_floor_rejected(self, bad_floor):
        with pytest.raises(ConfigError):
            TimeGrid.make_uniform(8, t_floor=bad_floor)


class TestSampling:
    def test_target_law_moments(self, mixture_d2):
        xs = sample_target(mixture_d2, 200_000, seed=5)
        assert np.allclose(xs.mean(axis=0), 0.0, atol=1.5e-2)
        assert np.allclose(np.cov(xs.T), mixture_d2.covariance(), atol=2e-2)

    def test_target_determinism(self, mixture_d2):
        assert np.array_equal(
            sample_target(mixture_d2, 64, seed=3), sample_target(mixture_d2, 64, seed=3)
        )

    def test_bad_n_rejected(self, standard2):
        with pytest.raises(ConfigError):
            sample_target(standard2, 0, seed=0)

    @given(
        tau=st.floats(0.05, 1.0),
        seed=st.integers(0, 2**32 - 1),
        n=st.integers(1, 64),
    )
    @settings(max_examples=40, deadline=None)
    def test_interpolant_row_identities(self, tau, seed, n):
        target = GaussianMixtureTarget(
            dim=2,
            weights=np.array([0.5, 0.5]),
            means=np.array([[1.0, 0.0], [-1.0, 0.0]]),
            sigma=0.5,
        )
        tr = sample_interpolant(target, n, tau, seed)
        assert tr.xt == pytest.approx((1.0 - tr.t)[:, None] * tr.z + tr.t[:, None] * tr.x1)
        assert np.array_equal(tr.y, tr.x1 - tr.z)
        assert np.all((tr.t > 0.0) & (tr.t <= tau))
        assert tr.n == n and tr.tau == tau and tr.seed == seed

    @pytest.mark.parametrize("bad_tau", [0.0, -0.5, 1.0001])
    def test_bad_tau_rejected(self, standard2, bad_tau):
        with pytest.raises(ConfigError):
            sample_interpolant(standard2, 8, bad_tau, seed=0)


class TestMarginal:
    def test_variance_endpoints(self, mixture_d1):
        assert interpolant_variance(mixture_d1, 0.0) == 1.0
        assert interpolant_variance(mixture_d1, 1.0) == pytest.approx(0.25)

    def test_t0_marginal_is_standard_gaussian(self, mixture_d2):
        x = np.array([0.3, -0.7])
        expected = -0.5 * float(x @ x) - np.log(2.0 * np.pi)
        assert marginal_logpdf_xt(mixture_d2, 0.0, x) == pytest.approx(expected, abs=1e-12)

    def test_t1_marginal_is_target(self, mixture_d1):
        x = np.array([0.2])
        s = mixture_d1.sigma
        comp = mixture_d1.weights * np.exp(
            -((x[0] - mixture_d1.means[:, 0]) ** 2) / (2 * s * s)
        ) / np.sqrt(2 * np.pi * s * s)
        assert marginal_pdf_xt(mixture_d1, 1.0, x) == pytest.approx(comp.sum(), rel=1e-12)

    @pytest.mark.parametrize("t", [0.0, 0.3, 0.7, 1.0])
    def test_pdf_integrates_to_one(self, mixture_d1, t):
        total, _ = quad(
            lambda u: marginal_pdf_xt(mixture_d1, t, np.array([u])), -12, 12, limit=200
        )
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_batch_matches_single(self, mixture_d2):
        pts = rng(9).standard_normal((5, 2))
        batch = marginal_logpdf_xt(mixture_d2, 0.6, pts)
        singles = [marginal_logpdf_xt(mixture_d2, 0.6, p) for p in pts]
        assert batch == pytest.approx(singles)

    def test_marginal_matches_monte_carlo(self, mixture_d2):
        # CDF-free check: P(||Xt - x|| < r) estimated two ways
        t, x, r = 0.55, np.array([0.4, -0.2]), 0.35
        tr = sample_interpolant(mixture_d2, 400_000, 1.0, seed=31)
        keep = np.abs(tr.t - t) < 0.05
        pts = tr.xt[keep]
        p_mc = float(np.mean(np.linalg.norm(pts - x, axis=1) < r))
        p_pdf = float(marginal_pdf_xt(mixture_d2, t, x)) * np.pi * r * r
        assert p_mc == pytest.approx(p_pdf, rel=0.15)

    def test_bad_t_rejected(self, mixture_d1):
        with pytest.raises(ConfigError):
            marginal_logpdf_xt(mixture_d1, 1.2, np.array([0.0]))

    def test_dim_mismatch_rejected(self, mixture_d2):
        with pytest.raises(ConfigError):
            marginal_logpdf_xt(mixture_d2, 0.5, np.array([0.0]))

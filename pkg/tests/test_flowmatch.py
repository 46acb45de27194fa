import numpy as np
import pytest

from flowlab.core import ConfigError, NumericError, rng, sample_interpolant
from flowlab.flowmatch import (
    MlpVelocityModel,
    OptimizerConfig,
    OracleFieldModel,
    empirical_risk,
    empirical_risk_and_grad,
    excess_risk_vs_oracle,
    load_checkpoint,
    param_count_formula,
    save_checkpoint,
    train_erm,
)

from _oracles import FROZEN_ZERO_MODEL_RISK_PER_DIM, fd_param_gradient


class TestModel:
    def test_param_count_matches_formula(self):
        for dim, widths in [(1, ()), (2, (8,)), (3, (16, 8)), (2, (64, 64))]:
            model = MlpVelocityModel(dim, widths, seed=0)
            assert model.param_count() == param_count_formula(dim, widths)

    def test_param_count_formula_values(self):
        # (d+1+1)*w1 + (w1+1)*w2 + (w2+1)*d, by hand for d=2, widths (4, 3)
        assert param_count_formula(2, (4, 3)) == 4 * 4 + 5 * 3 + 4 * 2

    def test_eval_shapes_and_per_row_time(self):
        model = MlpVelocityModel(2, (5,), seed=1)
        x = rng(1).standard_normal((7, 2))
        out_scalar = model.eval(0.5, x)
        assert out_scalar.shape == (7, 2)
        ts = np.full(7, 0.5)
        assert np.array_equal(model.eval(ts, x), out_scalar)

    def test_flatten_unflatten_roundtrip(self):
        model = MlpVelocityModel(2, (4, 3), seed=2)
        theta = model.flatten()
        clone = MlpVelocityModel(2, (4, 3), seed=99)
        clone.unflatten(theta)
        x = rng(2).standard_normal((5, 2))
        assert np.array_equal(clone.eval(0.3, x), model.eval(0.3, x))

    def test_unflatten_size_checked(self):
        model = MlpVelocityModel(2, (4,), seed=0)
        with pytest.raises(ConfigError):
            model.unflatten(np.zeros(model.param_count() + 1))

    def test_copy_is_independent(self):
        model = MlpVelocityModel(1, (3,), seed=0)
        clone = model.copy()
        clone.params[0][0][0, 0] += 1.0
        assert model.params[0][0][0, 0] != clone.params[0][0][0, 0]

    def test_bad_construction_rejected(self):
        with pytest.raises(ConfigError):
            MlpVelocityModel(0, (4,))
        with pytest.raises(ConfigError):
            MlpVelocityModel(2, (4, 0))

    def test_seed_determinism(self):
        a = MlpVelocityModel(2, (8,), seed=7).flatten()
        b = MlpVelocityModel(2, (8,), seed=7).flatten()
        assert np.array_equal(a, b)
        assert not np.array_equal(a, MlpVelocityModel(2, (8,), seed=8).flatten())


class TestGradient:
    def test_backprop_matches_finite_differences(self, mixture_d2):
        triples = sample_interpolant(mixture_d2, 32, 0.95, seed=3)
        model = MlpVelocityModel(2, (6, 5), seed=4)
        loss, grads = empirical_risk_and_grad(model, triples)
        assert loss == pytest.approx(empirical_risk(model, triples))

        flat_grad = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in grads])

        probe = model.copy()

        def loss_of_theta(theta):
            probe.unflatten(theta)
            return empirical_risk(probe, triples)

        fd = fd_param_gradient(loss_of_theta, model.flatten())
        rel = np.linalg.norm(flat_grad - fd) / max(np.linalg.norm(fd), 1e-12)
        assert rel < 1e-4

    def test_gradient_zero_at_interpolation(self):
        # a model that already fits the data exactly has zero gradient
        from flowlab.core import GaussianMixtureTarget, TrainingTriples

        model = MlpVelocityModel(1, (), seed=0)
        # force the affine map v(t, x) = 2x: weights [[0], [2]], bias [0]
        model.params = [(np.array([[0.0], [2.0]]), np.zeros(1))]
        xt = rng(5).standard_normal((16, 1))
        triples = TrainingTriples(
            n=16,
            z=np.zeros((16, 1)),
            x1=np.zeros((16, 1)),
            t=np.full(16, 0.5),
            xt=xt,
            y=2.0 * xt,
            tau=1.0,
            seed=0,
        )
        loss, grads = empirical_risk_and_grad(model, triples)
        assert loss == pytest.approx(0.0, abs=1e-28)
        for gw, gb in grads:
            assert np.allclose(gw, 0.0) and np.allclose(gb, 0.0)


class TestTraining:
    def test_losses_start_at_initial_risk(self, mixture_d2):
        triples = sample_interpolant(mixture_d2, 64, 0.95, seed=6)
        model = MlpVelocityModel(2, (8,), seed=6)
        before = empirical_risk(model, triples)
        result = train_erm(model, triples, OptimizerConfig(step_size=0.01, iters=10))
        assert result.losses[0] == before
        assert result.losses.shape == (11,)
        assert result.n == 64

    def test_training_reduces_risk(self, mixture_d2):
        triples = sample_interpolant(mixture_d2, 256, 0.95, seed=7)
        model = MlpVelocityModel(2, (16, 16), seed=7)
        result = train_erm(model, triples, OptimizerConfig(step_size=0.05, iters=200))
        assert result.losses[-1] < 0.5 * result.losses[0]

    def test_momentum_update_matches_reference_loop(self, mixture_d2):
        # three steps of the update law v <- m v - lr g, theta <- theta + v,
        # re-implemented here on flat vectors
        triples = sample_interpolant(mixture_d2, 32, 0.9, seed=8)
        model = MlpVelocityModel(2, (4,), seed=8)
        mirror = model.copy()
        lr, mom = 0.03, 0.9

        theta = mirror.flatten()
        vel = np.zeros_like(theta)
        for _ in range(3):
            _, grads = empirical_risk_and_grad(mirror, triples)
            flat = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in grads])
            vel = mom * vel - lr * flat
            theta = theta + vel
            mirror.unflatten(theta)

        train_erm(model, triples, OptimizerConfig(step_size=lr, iters=3, momentum=mom))
        assert model.flatten() == pytest.approx(mirror.flatten(), rel=1e-12, abs=1e-12)

    def test_divergence_detected(self, mixture_d2):
        triples = sample_interpolant(mixture_d2, 64, 0.95, seed=9)
        model = MlpVelocityModel(2, (16,), seed=9)
        with np.errstate(over="ignore"), pytest.raises(NumericError, match="diverged"):
            train_erm(model, triples, OptimizerConfig(step_size=50.0, iters=400))

    def test_minibatch_mode_deterministic(self, mixture_d2):
        triples = sample_interpolant(mixture_d2, 128, 0.95, seed=10)
        cfg = OptimizerConfig(step_size=0.02, iters=20, batch_size=32, seed=5)
        a = MlpVelocityModel(2, (8,), seed=10)
        b = MlpVelocityModel(2, (8,), seed=10)
        train_erm(a, triples, cfg)
        train_erm(b, triples, cfg)
        assert np.array_equal(a.flatten(), b.flatten())


class TestExcessRisk:
    def test_oracle_wrapper_scores_zero(self, mixture_d2):
        est, se = excess_risk_vs_oracle(OracleFieldModel(mixture_d2), mixture_d2, 0.95, 2000, seed=11)
        assert est == pytest.approx(0.0, abs=1e-20)
        assert se == pytest.approx(0.0, abs=1e-20)

    def test_zero_model_matches_closed_form(self, standard2):
        # predicting zero on the standard Gaussian over tau = 1 costs exactly
        # d * integral of (2t-1)^2/(2t^2-2t+1) dt = d (2 - pi/2)
        class ZeroModel:
            def eval(self, t, x):
                return np.zeros_like(x)

        est, se = excess_risk_vs_oracle(ZeroModel(), standard2, 1.0, 400_000, seed=12)
        want = 2.0 * FROZEN_ZERO_MODEL_RISK_PER_DIM
        assert abs(est - want) < 4.0 * se
        assert se < 0.01


class TestCheckpoint:
    def test_roundtrip(self, tmp_path, mixture_d2):
        model = MlpVelocityModel(2, (8, 4), seed=13)
        triples = sample_interpolant(mixture_d2, 64, 0.95, seed=13)
        train_erm(model, triples, OptimizerConfig(step_size=0.02, iters=5))
        path = tmp_path / "model.json"
        save_checkpoint(model, str(path))
        loaded = load_checkpoint(str(path))
        assert loaded.widths == (8, 4) and loaded.dim == 2
        x = rng(13).standard_normal((6, 2))
        assert np.array_equal(loaded.eval(0.4, x), model.eval(0.4, x))

    def test_malformed_checkpoint_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"params": [1, 2, 3]}')
        with pytest.raises(ConfigError):
            load_checkpoint(str(path))

"""Training: logistic loss, ridge penalty, analytic gradients, momentum SGD."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import (
    finite_diff_grads,
    gradcheck_case,
    max_relative_grad_error,
    random_sample,
    sample_from_edges,
)
from gnnbound.filters import FilterKind
from gnnbound.models import (
    GcnParams,
    ModelConfig,
    ModelKind,
    Nonlinearity,
    Readout,
    forward_graph,
    init_params,
)
from gnnbound.training import (
    TrainConfig,
    TrainingDivergenceError,
    empirical_risk,
    grad_empirical_risk,
    grad_regularized_risk,
    logistic_loss,
    logistic_loss_grad,
    measure_generalization,
    penalty,
    penalty_grads,
    regularized_risk,
    sgd_step,
    train,
    zeros_like_params,
)

GCN_SYM = ModelConfig(model_kind=ModelKind.GCN, filter_kind=FilterKind.SYM_NORM, width=1)


class TestLogisticLoss:
    def test_values(self):
        assert logistic_loss(0.0, 1) == pytest.approx(math.log(2), abs=1e-15)
        assert logistic_loss(0.0, -1) == pytest.approx(math.log(2), abs=1e-15)
        assert logistic_loss(1.0, -1) == pytest.approx(1.3132616875182228, rel=1e-15)
        assert logistic_loss(1.0, 1) == pytest.approx(math.log(1 + math.exp(-1)), rel=1e-14)

    def test_extreme_margins_stay_finite(self):
        assert logistic_loss(100.0, 1) == pytest.approx(0.0, abs=1e-40)
        assert logistic_loss(-1000.0, 1) == pytest.approx(1000.0, rel=1e-12)
        assert logistic_loss(1000.0, -1) == pytest.approx(1000.0, rel=1e-12)
        assert np.isfinite(logistic_loss(np.array([-1e300, 0.0, 1e300]), 1)).all()

    def test_gradient_values(self):
        assert logistic_loss_grad(0.0, 1) == -0.5
        assert logistic_loss_grad(0.0, -1) == 0.5
        # d/dz softplus(-z) at z=1 equals -sigma(-1)
        assert logistic_loss_grad(1.0, 1) == pytest.approx(-1 / (1 + math.e), rel=1e-14)

    def test_gradient_matches_finite_difference(self, rng):
        z = rng.standard_normal(200) * 5
        h = 1e-6
        for y in (1, -1):
            numeric = (logistic_loss(z + h, y) - logistic_loss(z - h, y)) / (2 * h)
            assert np.allclose(logistic_loss_grad(z, y), numeric, atol=1e-8)

    def test_gradient_magnitude_at_most_one(self, rng):
        z = rng.standard_normal(100_000) * 100
        for y in (1, -1):
            assert np.all(np.abs(logistic_loss_grad(z, y)) <= 1.0)


class TestPenalty:
    def test_hand_value(self):
        params = GcnParams(w1=np.array([[2.0]]), w2=np.array([0.0]))
        assert penalty(params, alpha=100.0) == pytest.approx(0.02, rel=1e-15)

    def test_duplicating_units_preserves_penalty(self):
        base = GcnParams(w1=np.array([[0.3, -1.2]]), w2=np.array([0.7]))
        wide = GcnParams(w1=np.tile(base.w1, (5, 1)), w2=np.tile(base.w2, 5))
        assert penalty(wide, 100.0) == pytest.approx(penalty(base, 100.0), rel=1e-15)

    def test_gradient_is_params_over_h_alpha_exactly(self):
        params = GcnParams(w1=np.array([[3.0, -1.0], [0.5, 2.0]]), w2=np.array([1.0, -4.0]))
        grads = penalty_grads(params, alpha=100.0)
        assert np.array_equal(grads.w1, params.w1 / 200.0)
        assert np.array_equal(grads.w2, params.w2 / 200.0)

    def test_penalty_gradient_matches_finite_difference(self, rng):
        params = GcnParams(w1=rng.standard_normal((3, 2)), w2=rng.standard_normal(3))
        grads = penalty_grads(params, alpha=7.0)
        h = 1e-7
        for name in ("w1", "w2"):
            arr = getattr(params, name)
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                bumped = arr.copy()
                bumped[idx] += h
                import dataclasses
                plus = penalty(dataclasses.replace(params, **{name: bumped}), 7.0)
                bumped[idx] -= 2 * h
                minus = penalty(dataclasses.replace(params, **{name: bumped}), 7.0)
                numeric = (plus - minus) / (2 * h)
                assert getattr(grads, name)[idx] == pytest.approx(numeric, abs=1e-7)


class TestRisk:
    def test_zero_params_risk_is_log_two(self, rng):
        samples = [random_sample(rng, 4, 2) for _ in range(5)]
        config = ModelConfig(model_kind=ModelKind.GCN, filter_kind=FilterKind.SYM_NORM,
                             width=3)
        params = zeros_like_params(init_params(config, 2, seed=0))
        assert empirical_risk(params, samples, config) == pytest.approx(
            math.log(2), abs=1e-15
        )

    def test_risk_is_mean_of_per_sample_losses(self, rng):
        config = ModelConfig(model_kind=ModelKind.MPGNN, filter_kind=FilterKind.MEAN_AGG,
                             width=2)
        params = init_params(config, 2, seed=1)
        samples = [random_sample(rng, 5, 2) for _ in range(3)]
        expected = np.mean(
            [logistic_loss(forward_graph(params, s, config), s.label) for s in samples]
        )
        assert empirical_risk(params, samples, config) == pytest.approx(expected, rel=1e-14)

    def test_regularized_adds_penalty(self, rng):
        config = ModelConfig(model_kind=ModelKind.GCN, filter_kind=FilterKind.SUM_AGG,
                             width=2)
        params = init_params(config, 2, seed=1)
        samples = [random_sample(rng, 4, 2) for _ in range(2)]
        assert regularized_risk(params, samples, config, 50.0) == pytest.approx(
            empirical_risk(params, samples, config) + penalty(params, 50.0), rel=1e-14
        )


class TestGradients:
    def test_gradcheck_small_gcn(self, rng):
        params, batch, config = gradcheck_case(
            rng, ModelKind.GCN, FilterKind.SYM_NORM, Readout.MEAN, width=2,
            feature_dim=2, activation=Nonlinearity.TANH,
        )
        analytic = grad_regularized_risk(params, batch, config, 100.0)
        numeric = finite_diff_grads(params, batch, config, 100.0)
        assert max_relative_grad_error(analytic, numeric) < 1e-5

    def test_gradcheck_mpgnn_sum_readout(self, rng):
        params, batch, config = gradcheck_case(
            rng, ModelKind.MPGNN, FilterKind.SUM_AGG, Readout.SUM, width=3,
            feature_dim=2, activation=Nonlinearity.SIGMOID_CENTERED,
        )
        analytic = grad_regularized_risk(params, batch, config, 100.0)
        numeric = finite_diff_grads(params, batch, config, 100.0)
        assert max_relative_grad_error(analytic, numeric) < 1e-5

    def test_zero_features_make_loss_gradient_vanish(self):
        sample = sample_from_edges(3, [(0, 1), (1, 2)], features=np.zeros((3, 2)))
        config = ModelConfig(model_kind=ModelKind.GCN, filter_kind=FilterKind.SYM_NORM,
                             width=2)
        params = init_params(config, 2, seed=0)
        loss_grads = grad_empirical_risk(params, [sample], config)
        assert np.array_equal(loss_grads.w1, np.zeros_like(params.w1))
        decay = penalty_grads(params, 100.0)
        combined = grad_regularized_risk(params, [sample], config, 100.0)
        assert np.array_equal(combined.w1, decay.w1)

    def test_gradient_of_mean_is_mean_of_gradients(self, rng):
        config = ModelConfig(model_kind=ModelKind.GCN, filter_kind=FilterKind.RANDOM_WALK,
                             width=2)
        params = init_params(config, 2, seed=3)
        batch = [random_sample(rng, 4, 2) for _ in range(4)]
        whole = grad_empirical_risk(params, batch, config)
        parts_w1 = np.mean(
            [grad_empirical_risk(params, [s], config).w1 for s in batch], axis=0
        )
        assert np.allclose(whole.w1, parts_w1, atol=1e-15)


class TestSgdStep:
    def _config(self, **kwargs):
        return TrainConfig(**{"learning_rate": 1.0, "momentum": 0.0, **kwargs})

    def test_plain_step_subtracts_gradient(self):
        params = GcnParams(w1=np.array([[1.0, 2.0]]), w2=np.array([3.0]))
        grads = GcnParams(w1=params.w1.copy(), w2=params.w2.copy())
        velocity = zeros_like_params(params)
        new_params, new_velocity = sgd_step(params, grads, velocity, self._config())
        assert np.array_equal(new_params.w1, np.zeros((1, 2)))
        assert np.array_equal(new_params.w2, np.zeros(1))
        assert np.array_equal(new_velocity.w1, grads.w1)

    def test_two_momentum_steps(self):
        params = GcnParams(w1=np.array([[4.0]]), w2=np.array([-2.0]))
        g = GcnParams(w1=np.array([[0.5]]), w2=np.array([0.25]))
        config = TrainConfig(learning_rate=0.1, momentum=0.9)
        velocity = zeros_like_params(params)
        p1, v1 = sgd_step(params, g, velocity, config)
        p2, v2 = sgd_step(p1, g, v1, config)
        assert np.array_equal(v1.w1, g.w1)
        assert np.array_equal(v2.w1, 0.9 * g.w1 + g.w1)
        assert np.array_equal(p2.w1, (params.w1 - 0.1 * v1.w1) - 0.1 * v2.w1)

    def test_zero_gradient_leaves_params_unchanged(self):
        params = GcnParams(w1=np.array([[1.5]]), w2=np.array([2.5]))
        zero = zeros_like_params(params)
        new_params, new_velocity = sgd_step(params, zero, zero, self._config(momentum=0.9))
        assert np.array_equal(new_params.w1, params.w1)
        assert np.array_equal(new_velocity.w1, zero.w1)

    def test_inputs_not_mutated(self):
        params = GcnParams(w1=np.array([[1.0]]), w2=np.array([1.0]))
        grads = GcnParams(w1=np.array([[0.5]]), w2=np.array([0.5]))
        velocity = zeros_like_params(params)
        sgd_step(params, grads, velocity, self._config())
        assert params.w1[0, 0] == 1.0 and velocity.w1[0, 0] == 0.0


class TestTrain:
    def _setup(self, rng, n_samples=6, width=3):
        config = ModelConfig(model_kind=ModelKind.GCN, filter_kind=FilterKind.SYM_NORM,
                             width=width)
        samples = [random_sample(rng, 5, 2) for _ in range(n_samples)]
        params = init_params(config, 2, seed=int(rng.integers(2**31)))
        return params, samples, config

    def test_zero_epochs_returns_params_unchanged(self, rng):
        params, samples, config = self._setup(rng)
        trained, history = train(params, samples, TrainConfig(epochs=0), config)
        assert history == []
        assert np.array_equal(trained.w1, params.w1)
        assert np.array_equal(trained.w2, params.w2)

    def test_single_full_batch_step_matches_manual_update(self, rng):
        params, samples, config = self._setup(rng, n_samples=4)
        cfg = TrainConfig(epochs=1, batch_size=10, seed=21)
        trained, history = train(params, samples, cfg, config)

        order = np.random.default_rng(21).permutation(len(samples))
        batch = [samples[i] for i in order]
        grads = grad_regularized_risk(params, batch, config, cfg.alpha)
        manual, _ = sgd_step(params, grads, zeros_like_params(params), cfg)
        assert np.array_equal(trained.w1, manual.w1)
        assert np.array_equal(trained.w2, manual.w2)
        assert history == [empirical_risk(params, batch, config)]

    def test_history_has_one_entry_per_epoch(self, rng):
        params, samples, config = self._setup(rng)
        _, history = train(params, samples, TrainConfig(epochs=7, batch_size=2), config)
        assert len(history) == 7
        assert all(np.isfinite(history))

    def test_training_reduces_risk(self, rng):
        params, samples, config = self._setup(rng, n_samples=20, width=16)
        before = empirical_risk(params, samples, config)
        trained, _ = train(
            params, samples,
            TrainConfig(learning_rate=0.05, epochs=60, batch_size=8, seed=1), config,
        )
        after = empirical_risk(trained, samples, config)
        assert after < before

    def test_determinism(self, rng):
        params, samples, config = self._setup(rng)
        cfg = TrainConfig(epochs=5, batch_size=2, seed=13)
        a, hist_a = train(params, samples, cfg, config)
        b, hist_b = train(params, samples, cfg, config)
        assert np.array_equal(a.w1, b.w1) and np.array_equal(a.w2, b.w2)
        assert hist_a == hist_b

    def test_divergence_raises(self, rng):
        config = ModelConfig(
            model_kind=ModelKind.GCN, filter_kind=FilterKind.SUM_AGG, width=2,
            readout=Readout.SUM, activation=Nonlinearity.IDENTITY,
        )
        samples = [random_sample(rng, 8, 2) for _ in range(6)]
        params = init_params(config, 2, seed=1)
        cfg = TrainConfig(learning_rate=1e8, epochs=50, batch_size=6, seed=0)
        with pytest.raises(TrainingDivergenceError):
            train(params, samples, cfg, config)

    def test_empty_training_set_rejected(self, rng):
        params, _, config = self._setup(rng)
        with pytest.raises(ValueError):
            train(params, [], TrainConfig(), config)


class TestMeasureGeneralization:
    def test_identical_splits_have_zero_gap(self, rng):
        config = ModelConfig(model_kind=ModelKind.GCN, filter_kind=FilterKind.SYM_NORM,
                             width=2)
        params = init_params(config, 2, seed=0)
        samples = [random_sample(rng, 4, 2) for _ in range(3)]
        result = measure_generalization(params, samples, samples, config)
        assert result.abs_gen_error == 0.0
        assert result.train_risk == result.test_risk

    def test_fields_passed_through(self, rng):
        config = ModelConfig(model_kind=ModelKind.GCN, filter_kind=FilterKind.SYM_NORM,
                             width=4)
        params = init_params(config, 2, seed=0)
        train_set = [random_sample(rng, 4, 2) for _ in range(3)]
        test_set = [random_sample(rng, 4, 2) for _ in range(2)]
        result = measure_generalization(
            params, train_set, test_set, config, loss_history=[0.5, 0.4], seed=9
        )
        assert result.width == 4
        assert result.seed == 9
        assert result.loss_history == (0.5, 0.4)
        assert result.abs_gen_error == abs(result.test_risk - result.train_risk)


class TestTrainConfigValidation:
    @pytest.mark.parametrize("kwargs", [
        {"learning_rate": 0.0},
        {"learning_rate": -1.0},
        {"momentum": 1.0},
        {"momentum": -0.1},
        {"alpha": 0.0},
        {"batch_size": 0},
        {"epochs": -1},
    ])
    def test_invalid_settings_rejected(self, kwargs):
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)

    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.learning_rate, cfg.momentum, cfg.alpha) == (0.005, 0.9, 100.0)
        assert (cfg.batch_size, cfg.epochs, cfg.seed) == (128, 200, 0)

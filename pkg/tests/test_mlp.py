import numpy as np
import pytest

from handsign import (
    DEFAULT_WIDTHS,
    MlpModel,
    TrainConfig,
    generate_synthetic,
    gradient_check,
    mlp_forward,
    mlp_init,
    mlp_loss,
    mlp_train,
)

TINY_WIDTHS = (63, 8, 8, 8, 8, 8, 8, 8, 8, 24)


class TestInit:
    def test_default_widths_chain(self):
        model = mlp_init(seed=0)
        assert model.widths == DEFAULT_WIDTHS
        assert len(model.weights) == 9
        for w, b in zip(model.weights, model.biases):
            assert b.shape == (w.shape[1],)
            assert np.all(b == 0.0)

    def test_bound_scales_with_fan(self):
        model = mlp_init(seed=1)
        for w in model.weights:
            bound = np.sqrt(6.0 / sum(w.shape))
            assert np.abs(w).max() <= bound
            assert np.abs(w).max() > 0.5 * bound  # actually fills the range

    def test_deterministic(self):
        a = mlp_init(seed=3)
        b = mlp_init(seed=3)
        for wa, wb in zip(a.weights, b.weights):
            assert np.array_equal(wa, wb)

    def test_zero_model_uniform_output(self):
        model = MlpModel.zeros(TINY_WIDTHS)
        probs = mlp_forward(model, np.random.default_rng(0).normal(size=63))
        assert np.allclose(probs, 1.0 / 24.0, atol=1e-15)

    def test_malformed_widths_rejected(self):
        with pytest.raises(ValueError):
            mlp_init((10, 8, 8, 8, 8, 8, 8, 8, 8, 24))
        with pytest.raises(ValueError):
            mlp_init((63, 8, 24))
        with pytest.raises(ValueError):
            mlp_init((63, 8, 8, 8, 8, 8, 8, 8, 8, 23))


class TestForward:
    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(5)
        model = mlp_init(TINY_WIDTHS, seed=2)
        batch = rng.normal(scale=50, size=(200, 63))
        probs = mlp_forward(model, batch)
        assert probs.shape == (200, 24)
        assert np.all(probs >= 0)
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-9

    def test_two_layer_toy_matches_hand_computation(self):
        w1 = np.array([[1.0, -1.0], [0.5, 2.0]])
        b1 = np.array([0.1, -0.2])
        w2 = np.identity(2)
        b2 = np.zeros(2)
        model = MlpModel((w1, w2), (b1, b2))
        x = np.array([1.0, 2.0])
        # straight multiply-out: z1 = [2.1, 2.8], relu keeps both, softmax on z2
        expected = np.array([np.exp(2.1), np.exp(2.8)])
        expected = expected / expected.sum()
        assert np.allclose(mlp_forward(model, x), expected, atol=1e-12)

    def test_relu_clips_hidden_layer(self):
        w1 = np.array([[1.0, -1.0], [1.0, -1.0]])
        model = MlpModel((w1, np.identity(2)), (np.zeros(2), np.zeros(2)))
        probs = mlp_forward(model, np.array([1.0, 1.0]))
        # hidden = relu([2, -2]) = [2, 0]
        expected = np.array([np.exp(2.0), 1.0])
        expected = expected / expected.sum()
        assert np.allclose(probs, expected, atol=1e-12)

    def test_extreme_logits_stay_finite(self):
        model = MlpModel.zeros(TINY_WIDTHS)
        biased = MlpModel(model.weights, model.biases[:-1] + (np.linspace(0, 5000, 24),))
        probs = mlp_forward(biased, np.zeros(63))
        assert np.all(np.isfinite(probs))
        assert probs.sum() == pytest.approx(1.0, abs=1e-9)


class TestLoss:
    def test_certain_prediction_zero_loss(self):
        probs = np.zeros(24)
        probs[3] = 1.0
        assert mlp_loss(probs, 3) == 0.0

    def test_uniform_loss_is_log_24(self):
        probs = np.full(24, 1.0 / 24.0)
        assert mlp_loss(probs, 7) == pytest.approx(np.log(24.0), abs=1e-12)

    def test_zero_probability_clamped(self):
        probs = np.zeros(24)
        probs[0] = 1.0
        assert mlp_loss(probs, 5) == pytest.approx(-np.log(1e-12), rel=1e-12)


class TestTraining:
    def test_zero_epochs_identity(self):
        ds = generate_synthetic(per_class=2, jitter=0.05, placement=False, seed=0)
        model = mlp_init(TINY_WIDTHS, seed=0)
        out, curves = mlp_train(model, ds, TrainConfig(epochs=0))
        assert curves.loss.size == 0 and curves.accuracy.size == 0
        for w0, w1 in zip(model.weights, out.weights):
            assert np.array_equal(w0, w1)

    def test_zero_learning_rate_keeps_parameters(self):
        ds = generate_synthetic(per_class=2, jitter=0.05, placement=False, seed=1)
        model = mlp_init(TINY_WIDTHS, seed=1)
        out, curves = mlp_train(model, ds, TrainConfig(epochs=2, learning_rate=0.0))
        assert curves.loss.size == 2
        for w0, w1 in zip(model.weights, out.weights):
            assert np.array_equal(w0, w1)
        for b0, b1 in zip(model.biases, out.biases):
            assert np.array_equal(b0, b1)

    def test_loss_decreases_on_separable_data(self):
        ds = generate_synthetic(per_class=6, jitter=0.01, placement=False, seed=2)
        model = mlp_init(TINY_WIDTHS, seed=2)
        out, curves = mlp_train(model, ds, TrainConfig(epochs=25, seed=2))
        assert curves.loss[-1] < curves.loss[0]
        assert curves.accuracy[-1] > curves.accuracy[0]

    def test_training_deterministic(self):
        ds = generate_synthetic(per_class=2, jitter=0.02, placement=False, seed=3)
        cfg = TrainConfig(epochs=3, seed=9)
        out1, c1 = mlp_train(mlp_init(TINY_WIDTHS, seed=4), ds, cfg)
        out2, c2 = mlp_train(mlp_init(TINY_WIDTHS, seed=4), ds, cfg)
        for wa, wb in zip(out1.weights, out2.weights):
            assert np.array_equal(wa, wb)
        assert np.array_equal(c1.loss, c2.loss)

    def test_input_model_untouched(self):
        ds = generate_synthetic(per_class=2, jitter=0.02, placement=False, seed=4)
        model = mlp_init(TINY_WIDTHS, seed=5)
        snapshot = [w.copy() for w in model.weights]
        mlp_train(model, ds, TrainConfig(epochs=2))
        for w0, w1 in zip(snapshot, model.weights):
            assert np.array_equal(w0, w1)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(epochs=-1)
        with pytest.raises(ValueError):
            TrainConfig(batch_size=0)
        with pytest.raises(ValueError):
            TrainConfig(beta1=1.0)


class TestGradientCheck:
    def test_small_models_pass(self):
        rng = np.random.default_rng(1000)
        for seed in range(3):
            model = mlp_init(TINY_WIDTHS, seed=seed)
            x = rng.normal(size=63)
            target = int(rng.integers(0, 24))
            assert gradient_check(model, x, target, h=1e-5) < 1e-4

    def test_corrupted_gradient_is_caught(self):
        model = mlp_init(TINY_WIDTHS, seed=6)
        x = np.random.default_rng(7).normal(size=63)
        assert gradient_check(model, x, 4, h=1e-5, corruption=0.05) > 1e-2

    def test_zero_gradient_direction(self):
        model = MlpModel.zeros(TINY_WIDTHS)
        bias = np.zeros(24)
        bias[11] = 50.0  # drives prob(target) to exactly 1.0 in floats
        certain = MlpModel(model.weights, model.biases[:-1] + (bias,))
        x = np.zeros(63)
        assert mlp_forward(certain, x)[11] == 1.0
        err = gradient_check(certain, x, 11, h=1e-5)
        assert err < 1e-4

"""Feed-forward network: forward pass, damped Gauss-Newton training, decision rule."""

import math

import numpy as np
import pytest

from dnsids.classifiers.mlp import (MlpModel, MlpTrainConfig, get_params, mlp_classify,
                                    mlp_forward, mlp_init, mlp_jacobian, mlp_train_lm,
                                    set_params, train_lm_arrays)
from dnsids.classifiers.recipes import MlpRecipe
from dnsids.errors import Empty, InvalidWidth
from dnsids.preproc import ClassLabel, FeatureVector, LabeledDataset


def dataset_from_arrays(X, labels):
    samples = tuple((FeatureVector(float(x[0]), float(x[1]), int(x[2])), lbl)
                    for x, lbl in zip(X, labels))
    return LabeledDataset(samples)


def zero_model(hidden=7):
    return MlpModel(np.zeros((hidden, 3)), np.zeros(hidden),
                    np.zeros((3, hidden)), np.zeros(3))


class TestInit:
    def test_deterministic_per_seed(self):
        a = mlp_init(7, 42)
        b = mlp_init(7, 42)
        assert np.array_equal(a.hidden_weights, b.hidden_weights)
        assert np.array_equal(a.output_bias, b.output_bias)

    def test_zero_width_rejected(self):
        with pytest.raises(InvalidWidth):
            mlp_init(0, 1)

    def test_width_only_changes_shapes(self):
        small = mlp_init(3, 5)
        big = mlp_init(21, 5)
        assert small.hidden_weights.shape == (3, 3)
        assert big.hidden_weights.shape == (21, 3)
        assert small.output_weights.shape == (3, 3)
        assert big.output_weights.shape == (3, 21)

    def test_init_range_respected(self):
        m = mlp_init(7, 3, init_range=0.25)
        assert np.abs(get_params(m)).max() <= 0.25


class TestForward:
    def test_all_zero_weights_give_zero_output(self):
        assert np.array_equal(mlp_forward(zero_model(), [5.0, -3.0, 2.0]),
                              np.zeros(3))

    def test_single_active_path_is_tanh(self):
        m = zero_model()
        m.hidden_weights[0, 0] = 1.0
        m.output_weights[0, 0] = 1.0
        out = mlp_forward(m, [1.0, 0.0, 0.0])
        # independent scalar evaluation of the activation
        assert out[0] == pytest.approx(math.tanh(1.0), abs=1e-12)
        assert out[0] == pytest.approx(0.761594, abs=1e-6)

    def test_input_scaling_absorbed_by_first_layer(self):
        m = mlp_init(7, 9)
        x = np.array([0.3, -1.2, 2.0])
        halved = MlpModel(m.hidden_weights / 2.0, m.hidden_bias.copy(),
                          m.output_weights.copy(), m.output_bias.copy())
        assert np.allclose(mlp_forward(m, x), mlp_forward(halved, 2.0 * x))


class TestJacobian:
    def finite_difference(self, model, X, eps=1e-6):
        base = get_params(model)
        rows = []
        for i in range(base.size):
            plus = base.copy()
            plus[i] += eps
            minus = base.copy()
            minus[i] -= eps
            out_p = np.array([mlp_forward(set_params(model, plus), x) for x in X])
            out_m = np.array([mlp_forward(set_params(model, minus), x) for x in X])
            rows.append(((out_p - out_m) / (2 * eps)).ravel())
        return np.stack(rows, axis=1)

    def test_matches_central_differences(self):
        rng = np.random.default_rng(0)
        for trial in range(3):
            model = mlp_init(4, trial + 1)
            X = rng.normal(size=(5, 3))
            J = mlp_jacobian(model, X)
            J_fd = self.finite_difference(model, X)
            denom = np.maximum(np.abs(J_fd), 1.0)
            assert np.max(np.abs(J - J_fd) / denom) < 1e-5


class TestTraining:
    def test_fixed_point_converges_at_epoch_zero(self):
        X = np.array([[1.0, 2.0, 3.0], [0.5, 0.1, 0.0]])
        data = dataset_from_arrays(X, [ClassLabel.NORMAL, ClassLabel.NORMAL])
        model, report = mlp_train_lm(zero_model(), data)
        assert report.converged
        assert report.epochs_run == 0
        assert report.final_mse == 0.0

    def test_empty_dataset_rejected(self):
        with pytest.raises(Empty):
            mlp_train_lm(zero_model(), LabeledDataset(()))

    def test_accepted_mse_history_non_increasing(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 3))
        labels = [ClassLabel.DIRECT_DOS if x[0] > 0 else ClassLabel.NORMAL for x in X]
        data = dataset_from_arrays(np.abs(X), labels)
        _, report = mlp_train_lm(mlp_init(5, 2), data,
                                 MlpTrainConfig(max_epochs=60, target_mse=1e-12))
        history = report.mse_history
        assert all(a >= b for a, b in zip(history, history[1:]))

    def xor_data(self):
        X = np.array([[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 0]], dtype=float)
        T = np.array([[0, 0, 0], [1, 0, 0], [1, 0, 0], [0, 0, 0]], dtype=float)
        return X, T

    def test_xor_baseline_learnable_by_finite_difference_descent(self):
        # Slow but independent check that the task itself is solvable:
        # plain gradient descent with finite-difference gradients.
        X, T = self.xor_data()
        model = mlp_init(7, 1)
        params = get_params(model)

        def mse_at(p):
            m = set_params(model, p)
            out = np.array([mlp_forward(m, x) for x in X])
            return float(np.mean((out - T) ** 2))

        eps = 1e-5
        for _ in range(400):
            grad = np.zeros_like(params)
            for i in range(params.size):
                up = params.copy()
                up[i] += eps
                down = params.copy()
                down[i] -= eps
                grad[i] = (mse_at(up) - mse_at(down)) / (2 * eps)
            params -= 0.5 * grad
        assert mse_at(params) < 0.05

    def test_xor_conquered_quickly(self):
        X, T = self.xor_data()
        model = mlp_init(7, 1)
        trained, report = train_lm_arrays(model, X, T,
                                          MlpTrainConfig(max_epochs=200, target_mse=1e-3))
        assert report.final_mse <= 1e-3
        assert report.epochs_run <= 200

    def test_separable_blobs_classified_perfectly(self):
        rng = np.random.default_rng(7)
        centers = {ClassLabel.NORMAL: (5, 5, 0), ClassLabel.DIRECT_DOS: (40, 5, 5),
                   ClassLabel.AMPLIFICATION: (5, 40, 5)}
        X, labels = [], []
        for lbl, c in centers.items():
            pts = rng.normal(scale=0.5, size=(34, 3)) + np.array(c, dtype=float)
            X.extend(np.abs(pts))
            labels.extend([lbl] * 34)
        # brute-force margin check: blob spread is far below separation
        X = np.array(X)
        spreads = [np.linalg.norm(X[i * 34:(i + 1) * 34] - np.array(c), axis=1).max()
                   for i, c in enumerate(centers.values())]
        gaps = [np.linalg.norm(np.array(a) - np.array(b))
                for a in centers.values() for b in centers.values() if a != b]
        assert max(spreads) * 2 < min(gaps)

        data = dataset_from_arrays(X, labels)
        recipe = MlpRecipe(hidden=7)
        model, report = recipe.train(data, seed=3)
        preds = [recipe.classify(model, fv) for fv, _ in data.samples]
        assert preds == labels


class TestClassify:
    def test_nearest_code_examples(self):
        m = zero_model()
        m.output_bias = np.array([0.1, 0.2, 0.9])
        assert mlp_classify(m, [0, 0, 0]) is ClassLabel.DIRECT_DOS
        m.output_bias = np.array([0.0, 0.0, 0.0])
        assert mlp_classify(m, [0, 0, 0]) is ClassLabel.NORMAL
        m.output_bias = np.array([0.5, 0.5, 0.5])
        assert mlp_classify(m, [0, 0, 0]) is ClassLabel.NORMAL  # tie rule

    def test_amplification_code_nearest(self):
        m = zero_model()
        m.output_bias = np.array([0.1, 0.8, 0.2])
        assert mlp_classify(m, [1, 1, 1]) is ClassLabel.AMPLIFICATION

    def test_any_finite_input_gets_a_label(self):
        m = mlp_init(7, 2)
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.normal(scale=10.0 ** rng.integers(-3, 7), size=3)
            assert mlp_classify(m, x) in set(ClassLabel)


class TestRecipeStandardization:
    def test_returned_model_consumes_raw_features(self):
        # Wildly different column scales, as produced by the pipeline.
        rng = np.random.default_rng(11)
        X, labels = [], []
        for lbl, c in ((ClassLabel.NORMAL, (48, 60, 0)),
                       (ClassLabel.DIRECT_DOS, (100000, 510, 90)),
                       (ClassLabel.AMPLIFICATION, (99000, 3900, 10))):
            pts = np.array(c, dtype=float) + rng.normal(scale=(1.0, 1.0, 0.5),
                                                        size=(30, 3))
            X.extend(np.abs(pts))
            labels.extend([lbl] * 30)
        data = dataset_from_arrays(np.array(X), labels)
        recipe = MlpRecipe()
        model, report = recipe.train(data, seed=1)
        assert report.converged
        preds = [recipe.classify(model, fv) for fv, _ in data.samples]
        assert preds == labels

"""Uniform train/classify adapters so evaluation stays classifier-agnostic.

A recipe bundles hyperparameters and knows how to train a fresh model on
a dataset with a given seed and how to classify one feature vector. The
map-based classifier additionally normalizes its inputs, which is why
the adapter layer exists at all.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import Empty
from ..preproc import ClassLabel, FeatureVector, LabeledDataset, l2_normalize_rows
from .base import TrainReport
from .mlp import (MlpModel, MlpTrainConfig, _forward_batch, mlp_classify, mlp_init,
                  train_lm_arrays)
from .rbf import RbfModel, _activations, rbf_classify, rbf_train
from .som import (SomModel, SomTrainConfig, quantization_error, som_classify,
                  som_init, som_label, som_train)


def _as_vector(x) -> np.ndarray:
    if isinstance(x, FeatureVector):
        return x.as_array()
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class MlpRecipe:
    hidden: int = 7
    train_config: MlpTrainConfig = field(default_factory=MlpTrainConfig)
    name: str = "bp"

    def train(self, data: LabeledDataset, seed: int) -> tuple[MlpModel, TrainReport]:
        if len(data) == 0:
            raise Empty("cannot train on an empty dataset")
        cfg = replace(self.train_config, seed=seed)
        model = mlp_init(self.hidden, seed, cfg.weight_init_range)
        # Damped Gauss-Newton is brittle when the feature columns span
        # five orders of magnitude, so train in per-fold standardized
        # coordinates and fold the affine map back into the first layer;
        # the returned model consumes raw features.
        X = data.features()
        mu = X.mean(axis=0)
        sd = X.std(axis=0)
        sd = np.where(sd == 0.0, 1.0, sd)
        trained, report = train_lm_arrays(model, (X - mu) / sd, data.targets(), cfg)
        w1 = trained.hidden_weights / sd
        b1 = trained.hidden_bias - trained.hidden_weights @ (mu / sd)
        raw_model = MlpModel(w1, b1, trained.output_weights.copy(),
                             trained.output_bias.copy())
        return raw_model, report

    def classify(self, model: MlpModel, x) -> ClassLabel:
        return mlp_classify(model, _as_vector(x))

    def predict_codes(self, model: MlpModel, X: np.ndarray) -> np.ndarray:
        return _forward_batch(model, np.asarray(X, dtype=float))


@dataclass(frozen=True)
class RbfRecipe:
    centers: int = 10
    name: str = "rbf"

    def train(self, data: LabeledDataset, seed: int) -> tuple[RbfModel, TrainReport]:
        return rbf_train(data, self.centers, seed)

    def classify(self, model: RbfModel, x) -> ClassLabel:
        return rbf_classify(model, _as_vector(x))

    def predict_codes(self, model: RbfModel, X: np.ndarray) -> np.ndarray:
        phi = _activations(model.centers, model.width, np.asarray(X, dtype=float))
        return phi @ model.output_weights.T + model.output_bias


@dataclass(frozen=True)
class SomRecipe:
    train_config: SomTrainConfig = field(default_factory=SomTrainConfig)
    name: str = "som"

    def train(self, data: LabeledDataset, seed: int) -> tuple[SomModel, TrainReport]:
        start = time.perf_counter()
        cfg = replace(self.train_config, seed=seed)
        X = l2_normalize_rows(data.features())
        model = som_train(som_init(seed), X, cfg)
        model = som_label(model, X, data.labels())
        qe = quantization_error(model, X)
        wall = time.perf_counter() - start
        # No MSE target exists for the map; completing the schedule counts.
        return model, TrainReport(qe, cfg.epochs, wall, True, ())

    def classify(self, model: SomModel, x) -> ClassLabel:
        return som_classify(model, _as_vector(x))


def recipe_by_name(name: str, *, hidden: int = 7,
                   mlp_config: MlpTrainConfig | None = None,
                   rbf_centers: int = 10,
                   som_config: SomTrainConfig | None = None):
    if name == "mlp":
        return MlpRecipe(hidden=hidden, train_config=mlp_config or MlpTrainConfig())
    if name == "rbf":
        return RbfRecipe(centers=rbf_centers)
    if name == "som":
        return SomRecipe(train_config=som_config or SomTrainConfig())
    raise ValueError(f"unknown classifier {name!r}")

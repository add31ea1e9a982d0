"""Three neural classifiers over the 3-feature traffic vectors."""

from .base import TrainReport, nearest_code_label
from .mlp import (MlpModel, MlpTrainConfig, mlp_classify, mlp_forward, mlp_init,
                  mlp_jacobian, mlp_train_lm)
from .rbf import RbfModel, kmeans, rbf_classify, rbf_forward, rbf_train, rbf_width
from .som import (SomModel, SomTrainConfig, grid_positions, linkdist,
                  quantization_error, som_classify, som_init, som_label, som_train)
from .store import load_model, save_model

__all__ = [
    "TrainReport", "nearest_code_label",
    "MlpModel", "MlpTrainConfig", "mlp_init", "mlp_forward", "mlp_jacobian",
    "mlp_train_lm", "mlp_classify",
    "RbfModel", "kmeans", "rbf_width", "rbf_train", "rbf_forward", "rbf_classify",
    "SomModel", "SomTrainConfig", "grid_positions", "linkdist", "som_init",
    "som_train", "som_label", "som_classify", "quantization_error",
    "save_model", "load_model",
]

"""From-scratch convolutional tile classifier (float64 numpy)."""

from .network import (
    Architecture,
    Model,
    ModelMeta,
    backward,
    bce_loss,
    bilinear_resize,
    forward,
    forward_batch,
    init_model,
    normalize_batch,
    normalize_tile,
)
from .serialize import load_model, model_from_bytes, model_to_bytes, save_model
from .training import TrainConfig, train

__all__ = [
    "Architecture",
    "Model",
    "ModelMeta",
    "TrainConfig",
    "backward",
    "bce_loss",
    "bilinear_resize",
    "forward",
    "forward_batch",
    "init_model",
    "load_model",
    "model_from_bytes",
    "model_to_bytes",
    "normalize_batch",
    "normalize_tile",
    "save_model",
    "train",
]

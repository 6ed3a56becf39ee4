"""Seeded minibatch training for the tile classifier.

Optimizer is ADAM (beta1=0.9, beta2=0.999, eps=1e-8) by default, plain SGD
behind the config switch.  Shuffling, initialization, and batching all derive
from the config seed, so identical data + config reproduce identical weights
bit-for-bit on the same build.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyClassError
from .network import Model, backward, normalize_batch


@dataclass
class TrainConfig:
    epochs: int
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    optimizer: str = "adam"   # "adam" or "sgd"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    shuffle: bool = True

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


class _AdamState:
    def __init__(self, params):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads, cfg: TrainConfig):
        self.t += 1
        b1c = 1.0 - cfg.beta1 ** self.t
        b2c = 1.0 - cfg.beta2 ** self.t
        for k, g in grads.items():
            m = self.m[k]
            v = self.v[k]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * np.square(g)
            params[k] -= cfg.learning_rate * (m / b1c) / (np.sqrt(v / b2c) + cfg.eps)


def train(model: Model, tiles: np.ndarray, labels: np.ndarray,
          cfg: TrainConfig, on_epoch=None) -> tuple[Model, list[float]]:
    """Fit a copy of `model` on labeled tiles; returns (trained model,
    per-epoch mean loss history).

    tiles: (N, s, s, 3) uint8 square tiles, all the same size; labels: (N,)
    of {0, 1} (1 = by the artist).  Tiles are normalized batch-by-batch so
    large corpora never materialize as float64 all at once.  Both classes
    must be present.  on_epoch, when given, is called as
    on_epoch(epoch_index, mean_loss) after each epoch.
    """
    cfg.validate()
    tiles = np.asarray(tiles)
    labels = np.asarray(labels).reshape(-1).astype(np.float64)
    n = tiles.shape[0]
    if tiles.ndim != 4 or tiles.shape[3] != 3 or tiles.shape[1] != tiles.shape[2]:
        raise ValueError(f"tiles must be (N, s, s, 3), got {tiles.shape}")
    if labels.shape[0] != n:
        raise ValueError(f"{n} tiles but {labels.shape[0]} labels")
    if not (labels == 1.0).any():
        raise EmptyClassError("positive")
    if not (labels == 0.0).any():
        raise EmptyClassError("negative")

    out = model.copy()
    out.meta.tile_size = int(tiles.shape[1])
    out.meta.seed = cfg.seed
    out.meta.epochs = cfg.epochs

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    adam = _AdamState(out.params) if cfg.optimizer == "adam" else None
    resolution = out.arch.input_resolution

    history: list[float] = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            x = normalize_batch(tiles[idx], resolution)
            grads, loss = backward(out, x, labels[idx])
            loss_sum += loss * idx.size
            if adam is not None:
                adam.step(out.params, grads, cfg)
            else:
                for k, g in grads.items():
                    out.params[k] -= cfg.learning_rate * g
        history.append(loss_sum / n)
        if on_epoch is not None:
            on_epoch(epoch, history[-1])
    return out, history

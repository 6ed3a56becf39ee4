"""Tile classifier: architecture, initialization, forward, loss, backward.

The network is fixed-shape: three [conv 3x3 same -> ReLU -> maxpool 2x2]
blocks widening to (8, 16, 32) channels, a 64-unit dense layer with ReLU,
and a single sigmoid output.  Inputs are square RGB tensors normalized to
[-0.5, 0.5]; every tile size is resampled (bilinear, corner-aligned) to the
network's input resolution so one architecture serves all tile sizes.

All arithmetic is float64.  The final dense layer initializes to zero so an
untrained model outputs exactly 0.5; hidden layers use the uniform
+-sqrt(6/fan_in) rule.
"""

import copy
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArchitectureError, NonFiniteLossError, ShapeMismatchError
from .layers import (
    conv3x3_backward,
    conv3x3_forward,
    dense_backward,
    dense_forward,
    maxpool2x2_backward,
    maxpool2x2_forward,
    relu_backward,
    relu_forward,
    sigmoid,
)

# Probability outputs are clamped to the open interval (0, 1); these are the
# closest float64 neighbors of the endpoints.
_P_LO = np.nextafter(0.0, 1.0)
_P_HI = np.nextafter(1.0, 0.0)

# Loss-side clamp absorbing perfect confidence before the logs.
_LOSS_EPS = 1e-12

NORMALIZATION = {"divisor": 255.0, "offset": -0.5}


@dataclass(frozen=True)
class Architecture:
    input_resolution: int = 64
    in_channels: int = 3
    conv_channels: tuple[int, ...] = (8, 16, 32)
    dense_hidden: int = 64

    def validate(self) -> None:
        shrink = 2 ** len(self.conv_channels)
        if self.input_resolution % shrink or self.input_resolution < shrink:
            raise InvalidArchitectureError(
                f"input_resolution {self.input_resolution} must be a positive "
                f"multiple of {shrink} (one halving per pool)")
        if self.in_channels < 1 or self.dense_hidden < 1 or not self.conv_channels:
            raise InvalidArchitectureError("channel counts must be >= 1")

    @property
    def flat_features(self) -> int:
        side = self.input_resolution // 2 ** len(self.conv_channels)
        return self.conv_channels[-1] * side * side

    def param_shapes(self) -> list[tuple[str, tuple[int, ...]]]:
        """Declared parameter order; serialization and init follow it."""
        shapes = []
        c_in = self.in_channels
        for i, c_out in enumerate(self.conv_channels, start=1):
            shapes.append((f"conv{i}_w", (c_out, c_in, 3, 3)))
            shapes.append((f"conv{i}_b", (c_out,)))
            c_in = c_out
        shapes.append(("fc1_w", (self.dense_hidden, self.flat_features)))
        shapes.append(("fc1_b", (self.dense_hidden,)))
        shapes.append(("fc2_w", (1, self.dense_hidden)))
        shapes.append(("fc2_b", (1,)))
        return shapes

    def to_dict(self) -> dict:
        return {
            "input_resolution": self.input_resolution,
            "in_channels": self.in_channels,
            "conv_channels": list(self.conv_channels),
            "dense_hidden": self.dense_hidden,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Architecture":
        return cls(
            input_resolution=int(d["input_resolution"]),
            in_channels=int(d["in_channels"]),
            conv_channels=tuple(int(c) for c in d["conv_channels"]),
            dense_hidden=int(d["dense_hidden"]),
        )


@dataclass
class ModelMeta:
    tile_size: int
    tau: float = 1.0
    seed: int = 0
    epochs: int = 0
    normalization: dict = field(default_factory=lambda: dict(NORMALIZATION))


@dataclass
class Model:
    arch: Architecture
    params: dict[str, np.ndarray]
    meta: ModelMeta

    def copy(self) -> "Model":
        return Model(arch=self.arch,
                     params={k: v.copy() for k, v in self.params.items()},
                     meta=copy.deepcopy(self.meta))


def init_model(arch: Architecture, seed: int, tile_size: int | None = None) -> Model:
    """Seeded initialization (PCG64): hidden weights uniform +-sqrt(6/fan_in),
    all biases zero, final dense weights zero (untrained output is exactly 0.5).

    The same seed reproduces the same buffers bit-for-bit.
    """
    arch.validate()
    rng = np.random.Generator(np.random.PCG64(seed))
    params: dict[str, np.ndarray] = {}
    for name, shape in arch.param_shapes():
        if name.endswith("_b") or name == "fc2_w":
            params[name] = np.zeros(shape, dtype=np.float64)
        else:
            fan_in = int(np.prod(shape[1:]))
            bound = np.sqrt(6.0 / fan_in)
            params[name] = rng.uniform(-bound, bound, size=shape)
    meta = ModelMeta(tile_size=int(tile_size or arch.input_resolution), seed=seed)
    return Model(arch=arch, params=params, meta=meta)


def _check_batch_shape(arch: Architecture, x: np.ndarray) -> None:
    want = (arch.in_channels, arch.input_resolution, arch.input_resolution)
    if x.ndim != 4 or x.shape[1:] != want:
        raise ShapeMismatchError(f"expected input batch (N, {want[0]}, {want[1]}, "
                                 f"{want[2]}), got {x.shape}")


def _forward_batch(model: Model, x: np.ndarray, need_cache: bool = False):
    """Run the stack on (N, C, R, R) inputs; returns (p, z, caches).

    p is clamped into the open interval (0, 1); z is the raw pre-sigmoid
    activation used by the fused loss gradient.  Internally activations are
    carried channels-leading (C, N, H, W); see layers.py.
    """
    _check_batch_shape(model.arch, x)
    params = model.params
    caches = []
    h = np.ascontiguousarray(
        np.asarray(x, dtype=np.float64).transpose(1, 0, 2, 3))
    for i in range(1, len(model.arch.conv_channels) + 1):
        h, c_conv = conv3x3_forward(h, params[f"conv{i}_w"], params[f"conv{i}_b"])
        h, c_relu = relu_forward(h)
        h, c_pool = maxpool2x2_forward(h)
        if need_cache:
            caches.append((c_conv, c_relu, c_pool))
    conv_shape = h.shape  # (C, N, h', w')
    h = h.transpose(1, 0, 2, 3).reshape(conv_shape[1], -1)
    h, c_fc1 = dense_forward(h, params["fc1_w"], params["fc1_b"])
    h, c_relu1 = relu_forward(h)
    z, c_fc2 = dense_forward(h, params["fc2_w"], params["fc2_b"])
    z = z[:, 0]
    p = np.clip(sigmoid(z), _P_LO, _P_HI)
    if need_cache:
        caches.append((conv_shape, c_fc1, c_relu1, c_fc2))
    return p, z, caches


def forward(model: Model, tile_input: np.ndarray) -> float:
    """Probability that a single normalized (C, R, R) tile is by the artist."""
    x = np.asarray(tile_input, dtype=np.float64)
    if x.ndim != 3:
        raise ShapeMismatchError(f"expected a (C, R, R) tile tensor, got {x.shape}")
    p, _, _ = _forward_batch(model, x[np.newaxis])
    return float(p[0])


def forward_batch(model: Model, tile_inputs: np.ndarray) -> np.ndarray:
    """Vectorized forward over (N, C, R, R); returns probabilities (N,)."""
    p, _, _ = _forward_batch(model, tile_inputs)
    return p


def bce_loss(p: float, label) -> float:
    """Binary cross-entropy -[y ln p + (1-y) ln(1-p)], with p clamped to
    [1e-12, 1-1e-12] so perfect confidence stays finite.  The clamp bounds
    the reported loss only; training gradients use the fused (p - y) form."""
    p = np.clip(np.asarray(p, dtype=np.float64), _LOSS_EPS, 1.0 - _LOSS_EPS)
    y = np.asarray(label, dtype=np.float64)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log1p(-p))))


def backward(model: Model, inputs: np.ndarray, labels: np.ndarray):
    """Gradients of the mean BCE loss over a batch.

    inputs: (N, C, R, R) normalized tiles; labels: (N,) in {0, 1}.
    Returns (grads, mean_loss) where grads has one array per parameter,
    same shapes as model.params.  Raises NonFiniteLossError if the loss or
    any gradient stops being finite.
    """
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if y.shape[0] != x.shape[0]:
        raise ShapeMismatchError(
            f"{x.shape[0]} inputs but {y.shape[0]} labels")
    n = x.shape[0]
    p, z, caches = _forward_batch(model, x, need_cache=True)
    loss = bce_loss(p, y)
    if not np.isfinite(loss):
        raise NonFiniteLossError(f"loss is not finite: {loss}")

    grads: dict[str, np.ndarray] = {}
    conv_shape, c_fc1, c_relu1, c_fc2 = caches[-1]
    dz = ((p - y) / n)[:, np.newaxis]
    dh, grads["fc2_w"], grads["fc2_b"] = dense_backward(dz, c_fc2)
    dh = relu_backward(dh, c_relu1)
    dh, grads["fc1_w"], grads["fc1_b"] = dense_backward(dh, c_fc1)
    dh = np.ascontiguousarray(
        dh.reshape(conv_shape[1], conv_shape[0], conv_shape[2], conv_shape[3])
          .transpose(1, 0, 2, 3))
    for i in range(len(model.arch.conv_channels), 0, -1):
        c_conv, c_relu, c_pool = caches[i - 1]
        dh = maxpool2x2_backward(dh, c_pool)
        dh = relu_backward(dh, c_relu)
        dh, grads[f"conv{i}_w"], grads[f"conv{i}_b"] = conv3x3_backward(
            dh, c_conv, need_dx=(i > 1))

    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise NonFiniteLossError(f"gradient for {name} is not finite")
    return grads, loss


def bilinear_resize(batch: np.ndarray, out_size: int) -> np.ndarray:
    """Corner-aligned bilinear resample of (N, s, s, C) to (N, R, R, C) float64.

    Output sample i maps to source coordinate i * (s-1) / (R-1), so the four
    corners are reproduced exactly; a 1x1 source broadcasts its single value.
    """
    batch = np.asarray(batch)
    n, s = batch.shape[0], batch.shape[1]
    g = batch.astype(np.float64)
    if s == out_size:
        return g
    if out_size > 1:
        coords = np.arange(out_size, dtype=np.float64) * ((s - 1) / (out_size - 1))
    else:
        coords = np.zeros(1)
    i0 = np.clip(np.floor(coords).astype(np.int64), 0, s - 1)
    frac = coords - i0
    i1 = np.minimum(i0 + 1, s - 1)
    rows = (g[:, i0] * (1.0 - frac)[np.newaxis, :, np.newaxis, np.newaxis]
            + g[:, i1] * frac[np.newaxis, :, np.newaxis, np.newaxis])
    out = (rows[:, :, i0] * (1.0 - frac)[np.newaxis, np.newaxis, :, np.newaxis]
           + rows[:, :, i1] * frac[np.newaxis, np.newaxis, :, np.newaxis])
    return out


def normalize_batch(tiles: np.ndarray, out_resolution: int = 64) -> np.ndarray:
    """(N, s, s, 3) uint8 tiles -> (N, 3, R, R) float64 in [-0.5, 0.5]."""
    resized = bilinear_resize(tiles, out_resolution)
    resized /= NORMALIZATION["divisor"]
    resized += NORMALIZATION["offset"]
    return resized.transpose(0, 3, 1, 2)


def normalize_tile(tile, out_resolution: int = 64) -> np.ndarray:
    """Resample one tile's RGB content to the network input resolution and
    map bytes into [-0.5, 0.5].  Accepts a tiling.Tile or a raw (s, s, 3)
    uint8 array; returns (3, R, R) float64."""
    rgb = tile.color_pixels if hasattr(tile, "color_pixels") else np.asarray(tile)
    return normalize_batch(rgb[np.newaxis], out_resolution)[0]

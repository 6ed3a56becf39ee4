"""Layer forward/backward kernels used by the tile classifier.

Everything is plain float64 numpy.  Convolutions are 3x3, stride 1, pad 1
("same"), lowered to one matmul via im2col; max pooling is 2x2 stride 2
with first-index tie-breaking so results are deterministic.  Each forward
returns (output, cache) and each backward consumes that cache.

Activations flow in channels-leading layout (C, B, H, W): the im2col
buffer is then written and read in contiguous (B*H*W) planes, which is
where a float64 CPU implementation spends its time.
"""

import numpy as np

from ..errors import ShapeMismatchError


def im2col_3x3(x: np.ndarray) -> np.ndarray:
    """Lower (C, B, H, W) into a (C*9, B*H*W) patch matrix for a
    same-padded 3x3 convolution.  Row order is (c, ki, kj)."""
    c, b, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    cols = np.empty((c, 3, 3, b, h, w), dtype=np.float64)
    for ki in range(3):
        for kj in range(3):
            cols[:, ki, kj] = xp[:, :, ki:ki + h, kj:kj + w]
    return cols.reshape(c * 9, b * h * w)


def conv3x3_forward(x, weight, bias):
    """Same-padded 3x3 convolution.

    x: (C_in, B, H, W); weight: (C_out, C_in, 3, 3); bias: (C_out,)
    returns out (C_out, B, H, W) and a cache for the backward pass.
    """
    c, b, h, w = x.shape
    c_out = weight.shape[0]
    if weight.shape[1] != c:
        raise ShapeMismatchError(
            f"conv expects {weight.shape[1]} input channels, got {c}")
    cols = im2col_3x3(x)
    out = weight.reshape(c_out, c * 9) @ cols
    out += bias[:, np.newaxis]
    cache = (x.shape, cols, weight)
    return out.reshape(c_out, b, h, w), cache


def conv3x3_backward(dout, cache, need_dx: bool = True):
    """Gradients of conv3x3_forward: returns (dx, dweight, dbias).

    need_dx=False skips the input gradient (first layer of a network),
    which drops the most expensive col2im accumulation.
    """
    x_shape, cols, weight = cache
    c, b, h, w = x_shape
    c_out = weight.shape[0]
    dmat = dout.reshape(c_out, b * h * w)
    dbias = dmat.sum(axis=1)
    dweight = (dmat @ cols.T).reshape(weight.shape)
    if not need_dx:
        return None, dweight, dbias
    dcols = (weight.reshape(c_out, c * 9).T @ dmat).reshape(c, 3, 3, b, h, w)
    dxp = np.zeros((c, b, h + 2, w + 2), dtype=np.float64)
    for ki in range(3):
        for kj in range(3):
            dxp[:, :, ki:ki + h, kj:kj + w] += dcols[:, ki, kj]
    return dxp[:, :, 1:h + 1, 1:w + 1], dweight, dbias


def maxpool2x2_forward(x):
    """2x2 max pooling, stride 2, over the trailing two axes (H and W even).

    Ties route to the first element in row-major window order, which keeps
    the backward pass deterministic.  Strided views avoid any reshuffled
    copy of the input.
    """
    h, w = x.shape[-2:]
    if h % 2 or w % 2:
        raise ShapeMismatchError(f"pooling needs even spatial dims, got {h}x{w}")
    q00 = x[..., 0::2, 0::2]
    q01 = x[..., 0::2, 1::2]
    q10 = x[..., 1::2, 0::2]
    q11 = x[..., 1::2, 1::2]
    out = np.maximum(np.maximum(q00, q01), np.maximum(q10, q11))
    cache = (x, out)
    return out, cache


def maxpool2x2_backward(dout, cache):
    x, out = cache
    dx = np.empty_like(x)
    routed = np.zeros(out.shape, dtype=bool)
    for qi, qj in ((0, 0), (0, 1), (1, 0), (1, 1)):
        take = (x[..., qi::2, qj::2] == out) & ~routed
        dx[..., qi::2, qj::2] = dout * take
        routed |= take
    return dx


def relu_forward(x):
    out = np.maximum(x, 0.0)
    return out, x


def relu_backward(dout, cache):
    return dout * (cache > 0.0)


def dense_forward(x, weight, bias):
    """x: (B, D_in); weight: (D_out, D_in); bias: (D_out,).

    Computed with a fixed-order einsum rather than BLAS: each sample's dot
    products then come out bit-identical no matter how a caller batches its
    inputs (BLAS blocking varies with the batch extent).  The dense head is
    tiny next to the convolutions, so the cost is negligible.
    """
    if x.shape[1] != weight.shape[1]:
        raise ShapeMismatchError(
            f"dense expects input dim {weight.shape[1]}, got {x.shape[1]}")
    out = np.einsum("nd,od->no", x, weight, optimize=False) + bias
    cache = (x, weight)
    return out, cache


def dense_backward(dout, cache):
    x, weight = cache
    dweight = dout.T @ x
    dbias = dout.sum(axis=0)
    dx = dout @ weight
    return dx, dweight, dbias


def sigmoid(z):
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out

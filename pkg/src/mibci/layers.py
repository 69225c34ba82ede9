"""1-D network layers with explicit forward/backward passes.

All layer inputs are batched ``(batch, planes, length)`` float arrays.
Convolution is cross-correlation (no kernel flip). Forward functions return
``(output, cache)``; the cache feeds the matching backward function, which
returns the input gradient plus parameter gradients where applicable.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "conv1d_forward",
    "conv1d_backward",
    "relu",
    "relu_forward",
    "relu_backward",
    "maxpool_forward",
    "maxpool_backward",
    "batchnorm_forward",
    "batchnorm_backward",
    "dropout_forward",
    "dropout_backward",
]

BN_EPS = 1e-5
BN_MOMENTUM = 0.1


def _pad_widths(kernel_size: int) -> tuple[int, int]:
    total = kernel_size - 1
    left = total // 2
    return left, total - left


def conv1d_forward(
    x: np.ndarray,
    weight: np.ndarray,
    bias: np.ndarray,
    padding: str = "same",
) -> tuple[np.ndarray, tuple]:
    """Cross-correlate a batch with a (out, in, k) kernel stack plus bias.

    ``same`` zero-pads to preserve the length; ``valid`` requires
    ``length >= k`` and yields ``length - k + 1`` outputs.
    """
    if x.ndim != 3:
        raise ValueError(f"expected (batch, planes, length) input, got shape {x.shape}")
    out_planes, in_planes, k = weight.shape
    if x.shape[1] != in_planes:
        raise ValueError(f"input has {x.shape[1]} planes, kernel expects {in_planes}")
    if padding == "same":
        left, right = _pad_widths(k)
        xp = np.pad(x, ((0, 0), (0, 0), (left, right)))
    elif padding == "valid":
        if x.shape[2] < k:
            raise ValueError(f"valid padding needs length >= kernel ({x.shape[2]} < {k})")
        xp = x
    else:
        raise ValueError(f"unknown padding {padding!r}")
    windows = np.lib.stride_tricks.sliding_window_view(xp, k, axis=2)
    y = np.einsum("bplk,opk->bol", windows, weight, optimize=True)
    y += bias[None, :, None]
    cache = (xp, windows, weight, padding, x.shape)
    return y, cache


def conv1d_backward(dy: np.ndarray, cache: tuple) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of a conv layer: returns (dx, dweight, dbias)."""
    xp, windows, weight, padding, x_shape = cache
    out_planes, in_planes, k = weight.shape
    dw = np.einsum("bol,bplk->opk", dy, windows, optimize=True)
    db = dy.sum(axis=(0, 2))
    dxp = np.zeros_like(xp)
    # scatter through each kernel tap; k is small so the loop stays cheap
    for j in range(k):
        dxp[:, :, j : j + dy.shape[2]] += np.einsum("bol,op->bpl", dy, weight[:, :, j], optimize=True)
    if padding == "same":
        left, _ = _pad_widths(k)
        dx = dxp[:, :, left : left + x_shape[2]]
    else:
        dx = dxp
    return dx, dw, db


def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(0, x)."""
    return np.maximum(x, 0.0)


def relu_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = np.maximum(x, 0.0)
    return y, x > 0


def relu_backward(dy: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return dy * mask


def maxpool_forward(x: np.ndarray) -> tuple[np.ndarray, tuple]:
    """Window-2/stride-2 max pooling with ceil semantics.

    An odd trailing sample forms its own window, so the output length is
    ``ceil(length / 2)``.
    """
    b, p, length = x.shape
    odd = length % 2 == 1
    if odd:
        body = x[:, :, :-1].reshape(b, p, length // 2, 2)
    else:
        body = x.reshape(b, p, length // 2, 2)
    argmax = body.argmax(axis=3)
    pooled = np.take_along_axis(body, argmax[..., None], axis=3)[..., 0]
    if odd:
        pooled = np.concatenate([pooled, x[:, :, -1:]], axis=2)
    return pooled, (x.shape, argmax, odd)


def maxpool_backward(dy: np.ndarray, cache: tuple) -> np.ndarray:
    x_shape, argmax, odd = cache
    b, p, length = x_shape
    dx = np.zeros((b, p, length // 2, 2), dtype=dy.dtype)
    dy_body = dy[:, :, :-1] if odd else dy
    np.put_along_axis(dx, argmax[..., None], dy_body[..., None], axis=3)
    dx = dx.reshape(b, p, (length // 2) * 2)
    if odd:
        dx = np.concatenate([dx, dy[:, :, -1:]], axis=2)
    return dx


def batchnorm_forward(
    x: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    mode: str = "train",
) -> tuple[np.ndarray, tuple]:
    """Per-plane batch normalization over the batch and time axes.

    Train mode normalizes by batch statistics and updates the running
    buffers in place with momentum 0.1; eval mode uses the running buffers.
    A batch of one epoch cannot be normalized in train mode.
    """
    if mode == "train":
        if x.shape[0] < 2:
            raise ValueError("batchnorm in train mode needs a batch of at least 2")
        mean = x.mean(axis=(0, 2))
        var = x.var(axis=(0, 2))
        running_mean *= 1.0 - BN_MOMENTUM
        running_mean += BN_MOMENTUM * mean
        running_var *= 1.0 - BN_MOMENTUM
        running_var += BN_MOMENTUM * var
    elif mode == "eval":
        mean = running_mean
        var = running_var
    else:
        raise ValueError(f"unknown mode {mode!r}")
    inv_std = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (x - mean[None, :, None]) * inv_std[None, :, None]
    y = gamma[None, :, None] * xhat + beta[None, :, None]
    return y, (xhat, inv_std, gamma, mode)


def batchnorm_backward(dy: np.ndarray, cache: tuple) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of batchnorm: returns (dx, dgamma, dbeta)."""
    xhat, inv_std, gamma, mode = cache
    dgamma = (dy * xhat).sum(axis=(0, 2))
    dbeta = dy.sum(axis=(0, 2))
    scaled = dy * gamma[None, :, None] * inv_std[None, :, None]
    if mode == "eval":
        return scaled, dgamma, dbeta
    n = dy.shape[0] * dy.shape[2]
    mean_dy = scaled.sum(axis=(0, 2)) / n
    mean_dy_xhat = (scaled * xhat).sum(axis=(0, 2)) / n
    dx = scaled - mean_dy[None, :, None] - xhat * mean_dy_xhat[None, :, None]
    return dx, dgamma, dbeta


def dropout_forward(
    x: np.ndarray,
    p: float,
    mode: str = "train",
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverted dropout: train zeroes with probability p and rescales survivors."""
    if not 0 <= p < 1:
        raise ValueError("dropout probability must be in [0, 1)")
    if mode == "eval" or p == 0.0:
        return x, None
    if rng is None:
        raise ValueError("dropout in train mode needs an rng")
    mask = (rng.random(x.shape) >= p) / (1.0 - p)
    return x * mask, mask


def dropout_backward(dy: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    return dy if mask is None else dy * mask

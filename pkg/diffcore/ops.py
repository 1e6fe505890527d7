"""
Differentiable operators over rank-4 tensors.

Every public operator is registered in ``OPERATORS``; the test suite enumerates
the registry and requires a finite-difference check for each entry.
"""
import logging
from typing import Callable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from diffcore import special
from diffcore.tensor import ShapeError, Tensor, make_result

logger = logging.getLogger(__name__)

OPERATORS: dict[str, Callable[..., Tensor]] = {}


def register(name: str) -> Callable[[Callable[..., Tensor]], Callable[..., Tensor]]:
    """Add an operator to the gradient-checked registry."""

    def decorator(fn: Callable[..., Tensor]) -> Callable[..., Tensor]:
        if name in OPERATORS:
            raise ValueError(f"Operator '{name}' registered twice")
        OPERATORS[name] = fn
        return fn

    return decorator


def _require_rank4(x: Tensor, op: str) -> None:
    if x.data.ndim != 4:
        raise ShapeError(f"{op}: expected rank-4 (batch, channels, height, width), got shape {x.shape}")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` over the axes that were broadcast to reach its shape."""
    axes = tuple(i for i, (g, s) in enumerate(zip(grad.shape, shape)) if s == 1 and g != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> None:
    if a.data.ndim != b.data.ndim:
        raise ShapeError(f"{op}: rank mismatch {a.shape} vs {b.shape}")
    for axis, (da, db) in enumerate(zip(a.shape, b.shape)):
        if da != db and da != 1 and db != 1:
            raise ShapeError(f"{op}: dimension {axis} mismatch ({da} vs {db}) in {a.shape} vs {b.shape}")


# ---------------------------------------------------------------------------
# Convolution
# ---------------------------------------------------------------------------


@register("conv2d")
def conv2d(x: Tensor, weight: Tensor, bias: Tensor | None = None, stride: int = 1, padding: int = 0) -> Tensor:
    """
    2-D cross-correlation.

    Args:
        x: Input (batch, in_ch, H, W)
        weight: Kernel (out_ch, in_ch, kh, kw)
        bias: Optional vector of length out_ch
        stride: Positive step between windows
        padding: Zero padding on every spatial border

    Returns:
        Tensor (batch, out_ch, floor((H + 2p - kh) / s) + 1, ...)
    """
    _require_rank4(x, "conv2d")
    if weight.data.ndim != 4:
        raise ShapeError(f"conv2d: kernel must be rank-4 (out_ch, in_ch, kh, kw), got {weight.shape}")
    if stride < 1 or padding < 0:
        raise ValueError(f"conv2d: stride must be >= 1 and padding >= 0, got stride={stride}, padding={padding}")

    batch, in_ch, height, width = x.shape
    out_ch, k_in, kh, kw = weight.shape
    if k_in != in_ch:
        raise ShapeError(f"conv2d: in_ch mismatch, kernel expects {k_in} channels but input has {in_ch}")
    if bias is not None and bias.shape != (out_ch,):
        raise ShapeError(f"conv2d: bias must have shape ({out_ch},), got {bias.shape}")

    out_h = (height + 2 * padding - kh) // stride + 1
    out_w = (width + 2 * padding - kw) // stride + 1
    if out_h < 1 or out_w < 1:
        raise ShapeError(f"conv2d: output height/width would be {out_h}x{out_w} for input {height}x{width}")

    padded = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x.data
    # (batch, in_ch, out_h, out_w, kh, kw)
    windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride][:, :, :out_h, :out_w]
    out = np.tensordot(windows, weight.data, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if bias is not None:
        out = out + bias.data.reshape(1, out_ch, 1, 1)
    out = np.ascontiguousarray(out)

    def backward(grad: np.ndarray) -> Sequence[np.ndarray | None]:
        grad_w = np.tensordot(grad, windows, axes=([0, 2, 3], [0, 2, 3]))
        grad_b = grad.sum(axis=(0, 2, 3)) if bias is not None else None

        grad_padded = np.zeros_like(padded)
        h_span = stride * (out_h - 1) + 1
        w_span = stride * (out_w - 1) + 1
        for i in range(kh):
            for j in range(kw):
                contrib = np.tensordot(weight.data[:, :, i, j], grad, axes=([0], [1]))  # (in_ch, batch, oh, ow)
                grad_padded[:, :, i : i + h_span : stride, j : j + w_span : stride] += contrib.transpose(1, 0, 2, 3)
        if padding:
            grad_x = grad_padded[:, :, padding : padding + height, padding : padding + width]
        else:
            grad_x = grad_padded
        return np.ascontiguousarray(grad_x), grad_w, grad_b

    inputs = (x, weight) if bias is None else (x, weight, bias)
    return make_result("conv2d", out, inputs, backward)


# ---------------------------------------------------------------------------
# Elementwise
# ---------------------------------------------------------------------------


@register("relu")
def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return make_result("relu", x.data * mask, (x,), lambda g: (g * mask,))


@register("add")
def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum, broadcasting over singleton dimensions."""
    _check_broadcast(a, b, "add")
    return make_result(
        "add",
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


@register("sub")
def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "sub")
    return make_result(
        "sub",
        a.data - b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


@register("mul")
def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product, broadcasting over singleton dimensions."""
    _check_broadcast(a, b, "mul")
    return make_result(
        "mul",
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


@register("div")
def div(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "div")
    if np.any(b.data == 0):
        raise ValueError("div: division by zero")
    out = a.data / b.data
    return make_result(
        "div",
        out,
        (a, b),
        lambda g: (_unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)),
    )


@register("scale")
def scale(x: Tensor, factor: float) -> Tensor:
    """Multiply by a constant."""
    factor = float(factor)
    return make_result("scale", x.data * factor, (x,), lambda g: (g * factor,))


@register("abs")
def abs(x: Tensor) -> Tensor:  # noqa: A001 - mirrors numpy naming
    sign = np.sign(x.data)
    return make_result("abs", np.abs(x.data), (x,), lambda g: (g * sign,))


@register("clamp_min")
def clamp_min(x: Tensor, floor: float) -> Tensor:
    """max(x, floor); the gradient is zero where the floor is active."""
    mask = x.data > floor
    out = np.where(mask, x.data, floor).astype(x.dtype)
    return make_result("clamp_min", out, (x,), lambda g: (g * mask,))


@register("exp")
def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)
    return make_result("exp", out, (x,), lambda g: (g * out,))


@register("log")
def log(x: Tensor) -> Tensor:
    if np.any(x.data <= 0):
        raise ValueError("log: input must be strictly positive")
    return make_result("log", np.log(x.data), (x,), lambda g: (g / x.data,))


@register("softplus")
def softplus(x: Tensor) -> Tensor:
    """ln(1 + e^x), evaluated without overflow."""
    out = np.logaddexp(0.0, x.data).astype(x.dtype)
    return make_result("softplus", out, (x,), lambda g: (g * expit(x.data),))


@register("soft_cap")
def soft_cap(x: Tensor, limit: float) -> Tensor:
    """
    Smooth upper bound limit - softplus(limit - x).

    Equal to x - softplus(x - limit); each element uses whichever form avoids
    cancellation, so values far below ``limit`` pass through exactly and huge
    ones saturate at ``limit``. The slope expit(limit - x) never reaches zero.
    """
    limit = float(limit)
    below = x.data <= limit
    out = np.where(
        below,
        x.data - np.logaddexp(0.0, x.data - limit),
        limit - np.logaddexp(0.0, limit - x.data),
    ).astype(x.dtype)
    return make_result("soft_cap", out, (x,), lambda g: (g * expit(limit - x.data),))


@register("log_gamma")
def log_gamma(x: Tensor) -> Tensor:
    """Elementwise ln Γ(x) for x > 0."""
    out = special.log_gamma(x.data).astype(x.dtype)
    return make_result("log_gamma", out, (x,), lambda g: (g * special.digamma(x.data),))


@register("digamma")
def digamma(x: Tensor) -> Tensor:
    """Elementwise ψ(x) for x > 0."""
    out = special.digamma(x.data).astype(x.dtype)
    return make_result("digamma", out, (x,), lambda g: (g * special.trigamma(x.data),))


# ---------------------------------------------------------------------------
# Reductions and structure
# ---------------------------------------------------------------------------


@register("sum")
def sum(x: Tensor) -> Tensor:  # noqa: A001
    """Sum of all elements as a (1, 1, 1, 1) scalar."""
    out = np.asarray(x.data.sum(), dtype=x.dtype).reshape(1, 1, 1, 1)
    return make_result("sum", out, (x,), lambda g: (np.broadcast_to(g.reshape(()), x.shape).copy(),))


@register("mean")
def mean(x: Tensor) -> Tensor:
    """Mean of all elements as a (1, 1, 1, 1) scalar."""
    count = x.size
    out = np.asarray(x.data.mean(), dtype=x.dtype).reshape(1, 1, 1, 1)
    return make_result("mean", out, (x,), lambda g: (np.full(x.shape, g.reshape(()) / count, dtype=x.dtype),))


@register("global_avg_pool")
def global_avg_pool(x: Tensor) -> Tensor:
    """Spatial mean per channel, shape (batch, channels, 1, 1)."""
    _require_rank4(x, "global_avg_pool")
    area = x.shape[2] * x.shape[3]
    out = x.data.mean(axis=(2, 3), keepdims=True)
    return make_result("global_avg_pool", out, (x,), lambda g: (np.broadcast_to(g / area, x.shape).copy(),))


@register("concat_channels")
def concat_channels(tensors: Sequence[Tensor]) -> Tensor:
    """Concatenate along the channel axis."""
    if not tensors:
        raise ShapeError("concat_channels: empty input list")
    for t in tensors:
        _require_rank4(t, "concat_channels")
    ref = tensors[0].shape
    for t in tensors[1:]:
        if t.shape[0] != ref[0]:
            raise ShapeError(f"concat_channels: batch mismatch ({t.shape[0]} vs {ref[0]})")
        if t.shape[2:] != ref[2:]:
            raise ShapeError(f"concat_channels: spatial mismatch {t.shape[2:]} vs {ref[2:]}")

    out = np.concatenate([t.data for t in tensors], axis=1)
    splits = np.cumsum([t.shape[1] for t in tensors])[:-1]

    def backward(grad: np.ndarray) -> Sequence[np.ndarray]:
        return [np.ascontiguousarray(part) for part in np.split(grad, splits, axis=1)]

    return make_result("concat_channels", out, tuple(tensors), backward)


@register("downsample_avg2")
def downsample_avg2(x: Tensor) -> Tensor:
    """2x2 mean pooling; height and width must be even."""
    _require_rank4(x, "downsample_avg2")
    batch, channels, height, width = x.shape
    if height % 2 or width % 2:
        raise ShapeError(f"downsample_avg2: height and width must be even, got {height}x{width}")
    out = x.data.reshape(batch, channels, height // 2, 2, width // 2, 2).mean(axis=(3, 5))

    def backward(grad: np.ndarray) -> Sequence[np.ndarray]:
        return (np.repeat(np.repeat(grad, 2, axis=2), 2, axis=3) * 0.25,)

    return make_result("downsample_avg2", out, (x,), backward)


def _upsample_matrix(n: int, dtype: type[np.floating]) -> np.ndarray:
    """
    Linear interpolation matrix (2n, n) for a factor-2 enlargement.

    Output sample j sits at coarse coordinate (j - 0.5) / 2, so a coarse sample
    produced by 2x2 averaging is located at the centre of its footprint. Border
    samples extrapolate from the two nearest coarse samples, which keeps affine
    signals exact.
    """
    matrix = np.zeros((2 * n, n), dtype=dtype)
    if n == 1:
        matrix[:, 0] = 1.0
        return matrix
    for j in range(2 * n):
        u = (j - 0.5) / 2.0
        i0 = min(max(int(np.floor(u)), 0), n - 2)
        t = u - i0
        matrix[j, i0] = 1.0 - t
        matrix[j, i0 + 1] = t
    return matrix


@register("upsample_bilinear2")
def upsample_bilinear2(x: Tensor) -> Tensor:
    """Factor-2 bilinear enlargement (separable)."""
    _require_rank4(x, "upsample_bilinear2")
    rows = _upsample_matrix(x.shape[2], x.dtype.type)
    cols = _upsample_matrix(x.shape[3], x.dtype.type)
    out = np.einsum("ih,bchw,jw->bcij", rows, x.data, cols, optimize=True)

    def backward(grad: np.ndarray) -> Sequence[np.ndarray]:
        return (np.einsum("ih,bcij,jw->bchw", rows, grad, cols, optimize=True),)

    return make_result("upsample_bilinear2", out, (x,), backward)


@register("fft2")
def fft2(x: Tensor) -> Tensor:
    """
    Unnormalized 2-D DFT of each channel.

    Returns:
        Tensor (batch, 2 * channels, H, W); channel 2c holds the real plane and
        channel 2c + 1 the imaginary plane of input channel c
    """
    from diffcore.fft import fft2_complex

    _require_rank4(x, "fft2")
    batch, channels, height, width = x.shape
    spectrum = fft2_complex(x.data)
    out = np.empty((batch, 2 * channels, height, width), dtype=x.dtype)
    out[:, 0::2] = spectrum.real
    out[:, 1::2] = spectrum.imag

    def backward(grad: np.ndarray) -> Sequence[np.ndarray]:
        # Adjoint of a real-to-complex DFT: Re(F^H g) = Re(F conj(g)) since F is symmetric
        conj = grad[:, 0::2] - 1j * grad[:, 1::2]
        return (fft2_complex(conj).real.astype(x.dtype),)

    return make_result("fft2", out, (x,), backward)

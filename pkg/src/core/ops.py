"""Differentiable kernels.

Every kernel computes its forward result with numpy, then records a
backward rule on the tape. Backward rules for the non-trivial kernels are
module-level functions so the gradient-check suite can address them by
name. All reductions run in a fixed order for a given thread count:
matrix products go through BLAS, window scatters loop over kernel offsets
in row-major order.
"""

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import special

from .errors import DimensionError
from .tensor import Tensor, record

_SQRT_2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _as_tensor(value, like: Tensor | None = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(value), dtype=dtype)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f"{op}: operands do not broadcast", a.shape, b.shape) from None


# ---------------------------------------------------------------------------
# Elementwise arithmetic
# ---------------------------------------------------------------------------

def add(a, b) -> Tensor:
    a = _as_tensor(a, b if isinstance(b, Tensor) else None)
    b = _as_tensor(b, a)
    _broadcast_shape("add", a, b)
    out = Tensor(a.data + b.data)
    sa, sb = a.shape, b.shape
    return record("add", (a, b), out, lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b) -> Tensor:
    a = _as_tensor(a, b if isinstance(b, Tensor) else None)
    b = _as_tensor(b, a)
    _broadcast_shape("sub", a, b)
    out = Tensor(a.data - b.data)
    sa, sb = a.shape, b.shape
    return record("sub", (a, b), out, lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(a, b) -> Tensor:
    a = _as_tensor(a, b if isinstance(b, Tensor) else None)
    b = _as_tensor(b, a)
    _broadcast_shape("mul", a, b)
    out = Tensor(a.data * b.data)
    ad, bd = a.data, b.data
    return record(
        "mul", (a, b), out,
        lambda g: (_unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape))
    )


def div(a, b) -> Tensor:
    a = _as_tensor(a, b if isinstance(b, Tensor) else None)
    b = _as_tensor(b, a)
    _broadcast_shape("div", a, b)
    out = Tensor(a.data / b.data)
    ad, bd = a.data, b.data
    return record(
        "div", (a, b), out,
        lambda g: (_unbroadcast(g / bd, ad.shape), _unbroadcast(-g * ad / (bd * bd), bd.shape))
    )


def neg(x: Tensor) -> Tensor:
    out = Tensor(-x.data)
    return record("neg", (x,), out, lambda g: (-g,))


def exp(x: Tensor) -> Tensor:
    y = np.exp(x.data)
    return record("exp", (x,), Tensor(y), lambda g: (g * y,))


def log(x: Tensor) -> Tensor:
    xd = x.data
    return record("log", (x,), Tensor(np.log(xd)), lambda g: (g / xd,))


# ---------------------------------------------------------------------------
# Shape manipulation
# ---------------------------------------------------------------------------

def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    try:
        data = x.data.reshape(shape).copy()
    except ValueError:
        raise DimensionError(f"cannot reshape to {tuple(shape)}", x.shape) from None
    src = x.shape
    return record("reshape", (x,), Tensor(data), lambda g: (g.reshape(src),))


def transpose(x: Tensor, axes: tuple[int, ...] | None = None) -> Tensor:
    if axes is None:
        axes = tuple(reversed(range(x.ndim)))
    axes = tuple(a % x.ndim for a in axes)
    inverse = tuple(np.argsort(axes))
    data = np.ascontiguousarray(x.data.transpose(axes))
    return record("transpose", (x,), Tensor(data), lambda g: (g.transpose(inverse),))


def swap_last(x: Tensor) -> Tensor:
    """Transpose the last two axes."""
    axes = list(range(x.ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return transpose(x, tuple(axes))


def select(x: Tensor, index) -> Tensor:
    """Basic (slice/integer) indexing."""
    data = np.array(x.data[index], copy=True)
    shape, dtype = x.shape, x.dtype

    def grad_fn(g):
        full = np.zeros(shape, dtype=dtype)
        full[index] = g
        return (full,)

    return record("select", (x,), Tensor(data), grad_fn)


def concat(tensors: list[Tensor], axis: int = 0) -> Tensor:
    data = np.concatenate([t.data for t in tensors], axis=axis)
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return record(
        "concat", tuple(tensors), Tensor(data),
        lambda g: tuple(np.split(g, bounds, axis=axis))
    )


def broadcast_to(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    try:
        data = np.broadcast_to(x.data, shape).copy()
    except ValueError:
        raise DimensionError(f"cannot broadcast to {tuple(shape)}", x.shape) from None
    src = x.shape
    return record("broadcast_to", (x,), Tensor(data), lambda g: (_unbroadcast(g, src),))


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------

def sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    data = np.asarray(x.data.sum(axis=axis, keepdims=keepdims))
    shape = x.shape

    def grad_fn(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return record("sum", (x,), Tensor(data), grad_fn)


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    if axis is None:
        count = x.size
    else:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        count = int(np.prod([x.shape[a] for a in axes]))
    return div(sum(x, axis=axis, keepdims=keepdims), float(count))


# ---------------------------------------------------------------------------
# Matrix product
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product a[..., m, k] @ b[..., k, p]."""
    a = _as_tensor(a)
    b = _as_tensor(b, a)
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError("matmul needs operands with at least 2 dimensions", a.shape, b.shape)
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError("matmul inner dimensions differ", a.shape, b.shape)
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise DimensionError("matmul batch dimensions do not broadcast", a.shape, b.shape) from None
    ad, bd = a.data, b.data
    out = Tensor(np.matmul(ad, bd))
    return record("matmul", (a, b), out, lambda g: _matmul_backward(ad, bd, g))


def _matmul_backward(a: np.ndarray, b: np.ndarray, g: np.ndarray):
    da = np.matmul(g, np.swapaxes(b, -1, -2))
    db = np.matmul(np.swapaxes(a, -1, -2), g)
    return _unbroadcast(da, a.shape), _unbroadcast(db, b.shape)


# ---------------------------------------------------------------------------
# Activations
# ---------------------------------------------------------------------------

def relu(x: Tensor) -> Tensor:
    xd = x.data
    out = Tensor(np.maximum(xd, 0))
    return record("relu", (x,), out, lambda g: (g * (xd > 0),))


def gelu(x: Tensor) -> Tensor:
    """Exact GELU, x * Phi(x) with Phi the standard normal CDF."""
    xd = x.data
    cdf = 0.5 * (1.0 + special.erf(xd / _SQRT_2))
    out = Tensor((xd * cdf).astype(xd.dtype, copy=False))
    return record("gelu", (x,), out, lambda g: (_gelu_backward(xd, g),))


def _gelu_backward(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    cdf = 0.5 * (1.0 + special.erf(x / _SQRT_2))
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return (g * (cdf + x * pdf)).astype(x.dtype, copy=False)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    return record("softmax", (x,), Tensor(y), lambda g: (_softmax_backward(y, g, axis),))


def _softmax_backward(y: np.ndarray, g: np.ndarray, axis: int) -> np.ndarray:
    return y * (g - (g * y).sum(axis=axis, keepdims=True))


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    y = shifted - logz
    return record("log_softmax", (x,), Tensor(y), lambda g: (_log_softmax_backward(y, g, axis),))


def _log_softmax_backward(y: np.ndarray, g: np.ndarray, axis: int) -> np.ndarray:
    return g - np.exp(y) * g.sum(axis=axis, keepdims=True)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def layernorm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then apply the affine gamma, beta."""
    d = x.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise DimensionError("layernorm affine parameters must match the last axis", x.shape, gamma.shape, beta.shape)
    xd = x.data
    mu = xd.mean(axis=-1, keepdims=True)
    centered = xd - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    out = Tensor(xhat * gamma.data + beta.data)
    gd = gamma.data
    return record("layernorm", (x, gamma, beta), out, lambda g: _layernorm_backward(xhat, inv, gd, g))


def _layernorm_backward(xhat: np.ndarray, inv: np.ndarray, gamma: np.ndarray, g: np.ndarray):
    d = xhat.shape[-1]
    flat_g = g.reshape(-1, d)
    dgamma = (flat_g * xhat.reshape(-1, d)).sum(axis=0)
    dbeta = flat_g.sum(axis=0)
    dxhat = g * gamma
    dx = inv * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dgamma, dbeta


# ---------------------------------------------------------------------------
# Convolution and pooling
# ---------------------------------------------------------------------------

def output_extent(size: int, kernel: int, stride: int, padding: int) -> int:
    """Spatial extent after a window of ``kernel`` slides with ``stride``."""
    return (size + 2 * padding - kernel) // stride + 1


def _check_window(op: str, shape: tuple[int, ...], kernel: int, stride: int, padding: int) -> tuple[int, int]:
    if len(shape) != 4:
        raise DimensionError(f"{op} expects a [b, C, H, W] input", shape)
    if stride < 1:
        raise DimensionError(f"{op} stride must be >= 1, got {stride}", shape)
    if padding < 0:
        raise DimensionError(f"{op} padding must be >= 0, got {padding}", shape)
    _, _, h, w = shape
    if kernel > h + 2 * padding or kernel > w + 2 * padding:
        raise DimensionError(
            f"{op} kernel {kernel} larger than padded input", shape, (kernel, kernel)
        )
    return output_extent(h, kernel, stride, padding), output_extent(w, kernel, stride, padding)


def _windows(xp: np.ndarray, kernel: int, stride: int, oh: int, ow: int) -> np.ndarray:
    """View of shape [b, C, oh, ow, k, k] over a padded input."""
    view = sliding_window_view(xp, (kernel, kernel), axis=(2, 3))
    return view[:, :, ::stride, ::stride][:, :, :oh, :ow]


def _scatter_windows(
    target: np.ndarray, values: np.ndarray, kernel: int, stride: int, oh: int, ow: int
) -> None:
    """Add values[b, C, oh, ow, k, k] back onto their window positions in ``target``."""
    for i in range(kernel):
        for j in range(kernel):
            target[:, :, i:i + stride * (oh - 1) + 1:stride, j:j + stride * (ow - 1) + 1:stride] += values[..., i, j]


def conv2d(x: Tensor, w: Tensor, stride: int = 1, padding: int = 0, bias: Tensor | None = None) -> Tensor:
    """Cross-correlation of x[b, C_in, H, W] with w[C_out, C_in, k, k], zero padding."""
    if w.ndim != 4 or w.shape[2] != w.shape[3]:
        raise DimensionError("conv2d weight must be [C_out, C_in, k, k]", w.shape)
    c_out, c_in, k, _ = w.shape
    if x.ndim != 4 or x.shape[1] != c_in:
        raise DimensionError("conv2d input channels do not match weight", x.shape, w.shape)
    oh, ow = _check_window("conv2d", x.shape, k, stride, padding)
    b, _, h, wd = x.shape

    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    cols = _windows(xp, k, stride, oh, ow).transpose(0, 2, 3, 1, 4, 5).reshape(b * oh * ow, c_in * k * k)
    wmat = w.data.reshape(c_out, c_in * k * k)
    out = (cols @ wmat.T).reshape(b, oh, ow, c_out).transpose(0, 3, 1, 2)
    if bias is not None:
        out = out + bias.data.reshape(1, c_out, 1, 1)
    out = Tensor(np.ascontiguousarray(out))

    geometry = (x.shape, w.shape, k, stride, padding, oh, ow)
    inputs = (x, w) if bias is None else (x, w, bias)

    def grad_fn(g):
        grads = _conv2d_backward(cols, wmat, g, geometry)
        if bias is None:
            return grads
        return grads + (g.sum(axis=(0, 2, 3)),)

    return record("conv2d", inputs, out, grad_fn)


def _conv2d_backward(cols: np.ndarray, wmat: np.ndarray, g: np.ndarray, geometry):
    x_shape, w_shape, k, stride, padding, oh, ow = geometry
    b, c_in, h, w = x_shape
    c_out = w_shape[0]
    gmat = g.transpose(0, 2, 3, 1).reshape(b * oh * ow, c_out)
    dw = (gmat.T @ cols).reshape(w_shape)
    dcols = (gmat @ wmat).reshape(b, oh, ow, c_in, k, k).transpose(0, 3, 1, 2, 4, 5)
    dxp = np.zeros((b, c_in, h + 2 * padding, w + 2 * padding), dtype=cols.dtype)
    _scatter_windows(dxp, dcols, k, stride, oh, ow)
    dx = dxp[:, :, padding:padding + h, padding:padding + w]
    return np.ascontiguousarray(dx), dw


def maxpool2d(x: Tensor, kernel: int, stride: int, padding: int = 0) -> Tensor:
    """Per-window maximum; padding cells hold -inf and are never selected."""
    oh, ow = _check_window("maxpool2d", x.shape, kernel, stride, padding)
    b, c, h, w = x.shape
    xp = np.pad(
        x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)),
        constant_values=-np.inf
    )
    flat = _windows(xp, kernel, stride, oh, ow).reshape(b, c, oh, ow, kernel * kernel)
    arg = flat.argmax(axis=-1)  # first maximum on ties
    out = Tensor(np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0])
    geometry = (x.shape, kernel, stride, padding, oh, ow)
    return record("maxpool2d", (x,), out, lambda g: (_maxpool2d_backward(arg, g, geometry),))


def _maxpool2d_backward(arg: np.ndarray, g: np.ndarray, geometry) -> np.ndarray:
    x_shape, kernel, stride, padding, oh, ow = geometry
    b, c, h, w = x_shape
    routed = np.zeros(arg.shape + (kernel * kernel,), dtype=g.dtype)
    np.put_along_axis(routed, arg[..., None], g[..., None], axis=-1)
    dxp = np.zeros((b, c, h + 2 * padding, w + 2 * padding), dtype=g.dtype)
    _scatter_windows(dxp, routed.reshape(b, c, oh, ow, kernel, kernel), kernel, stride, oh, ow)
    return np.ascontiguousarray(dxp[:, :, padding:padding + h, padding:padding + w])

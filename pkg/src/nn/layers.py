"""Neural building blocks for the transformer encoder.

Layers take an explicit ``train`` flag and a numpy Generator for their
random masks; in evaluation mode they are deterministic and ignore the
generator entirely.
"""

import logging
import math

import numpy as np

from ..core import ops
from ..core.errors import ConfigError, ContractError, DimensionError
from ..core.tensor import Tensor
from . import init
from .module import Module, Parameter

logger = logging.getLogger(__name__)


def _check_rate(name: str, rate: float) -> float:
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"{name} rate must be in [0, 1), got {rate}")
    return float(rate)


class Linear(Module):
    """Affine map y = x W^T + b.

    Attributes:
        weight: Parameter [out_features, in_features]
        bias: Parameter [out_features] or None
    """

    def __init__(
        self,
        in_features: int,
        out_features: int,
        bias: bool = True,
        rng: np.random.Generator | None = None
    ):
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Parameter(init.trunc_normal((out_features, in_features), rng))
        self.bias = Parameter(init.zeros((out_features,)), decay=False) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.in_features:
            raise DimensionError(
                f"Linear expects last dimension {self.in_features}", x.shape, self.weight.shape
            )
        lead = x.shape[:-1]
        flat = x.reshape(-1, self.in_features)
        y = ops.matmul(flat, ops.transpose(self.weight))
        if self.bias is not None:
            y = y + self.bias
        return y.reshape(*lead, self.out_features)


class LayerNorm(Module):
    """Layer normalization over the last axis with affine gamma, beta."""

    def __init__(self, dim: int, eps: float = 1e-5):
        self.eps = eps
        self.gamma = Parameter(init.ones((dim,)), decay=False)
        self.beta = Parameter(init.zeros((dim,)), decay=False)

    def forward(self, x: Tensor) -> Tensor:
        return ops.layernorm(x, self.gamma, self.beta, self.eps)


class Dropout(Module):
    """Inverted dropout: kept elements are scaled by 1 / (1 - rate)."""

    def __init__(self, rate: float = 0.0):
        self.rate = _check_rate("dropout", rate)

    def forward(self, x: Tensor, train: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        if not train or self.rate == 0.0:
            return x
        if rng is None:
            raise ContractError("training-mode dropout needs a random generator")
        keep = rng.random(x.shape) >= self.rate
        mask = keep.astype(x.dtype) / x.dtype.type(1.0 - self.rate)
        return x * Tensor(mask)


class StochasticDepth(Module):
    """Drops a whole residual branch per sample with probability ``rate``."""

    def __init__(self, rate: float = 0.0):
        self.rate = _check_rate("stochastic depth", rate)

    def forward(self, x: Tensor, train: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        if not train or self.rate == 0.0:
            return x
        if rng is None:
            raise ContractError("training-mode stochastic depth needs a random generator")
        shape = (x.shape[0],) + (1,) * (x.ndim - 1)
        keep = rng.random(shape) >= self.rate
        mask = keep.astype(x.dtype) / x.dtype.type(1.0 - self.rate)
        return x * Tensor(mask)


class MultiHeadSelfAttention(Module):
    """Multi-headed scaled dot-product self-attention.

    A single fused projection produces queries, keys and values; heads are
    concatenated and passed through an output projection. Attention dropout
    is applied to the attention weights after the softmax.

    Example:
        msa = MultiHeadSelfAttention(dim=128, num_heads=2, rng=np.random.default_rng(0))
        y = msa(Tensor(np.zeros((2, 16, 128))))  # -> shape (2, 16, 128)
    """

    def __init__(
        self,
        dim: int,
        num_heads: int,
        attn_dropout: float = 0.0,
        rng: np.random.Generator | None = None
    ):
        if num_heads < 1 or dim % num_heads != 0:
            raise ConfigError(f"embedding dim {dim} is not divisible by {num_heads} heads")
        self.dim = dim
        self.num_heads = num_heads
        self.head_dim = dim // num_heads
        self.scale = 1.0 / math.sqrt(self.head_dim)
        self.qkv = Linear(dim, 3 * dim, rng=rng)
        self.attn_drop = Dropout(attn_dropout)
        self.proj = Linear(dim, dim, rng=rng)

    def attention_weights(self, x: Tensor, train: bool = False, rng: np.random.Generator | None = None) -> tuple[Tensor, Tensor]:
        """Return (attention weights [b, h, n, n], values [b, h, n, head_dim])."""
        b, n, d = x.shape
        if d != self.dim:
            raise DimensionError(f"attention expects embedding dim {self.dim}", x.shape)
        qkv = self.qkv(x).reshape(b, n, 3, self.num_heads, self.head_dim).transpose(2, 0, 3, 1, 4)
        q, k, v = qkv[0], qkv[1], qkv[2]
        scores = ops.matmul(q, ops.swap_last(k)) * self.scale
        attn = ops.softmax(scores, axis=-1)
        return self.attn_drop(attn, train, rng), v

    def forward(self, x: Tensor, train: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        b, n, _ = x.shape
        attn, v = self.attention_weights(x, train, rng)
        out = ops.matmul(attn, v).transpose(0, 2, 1, 3).reshape(b, n, self.dim)
        return self.proj(out)


class Mlp(Module):
    """Linear -> GELU -> dropout -> linear -> dropout."""

    def __init__(
        self,
        dim: int,
        hidden_dim: int,
        dropout: float = 0.0,
        rng: np.random.Generator | None = None
    ):
        self.fc1 = Linear(dim, hidden_dim, rng=rng)
        self.fc2 = Linear(hidden_dim, dim, rng=rng)
        self.drop = Dropout(dropout)

    def forward(self, x: Tensor, train: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        x = self.drop(ops.gelu(self.fc1(x)), train, rng)
        return self.drop(self.fc2(x), train, rng)


class EncoderBlock(Module):
    """Pre-norm transformer encoder block.

    x <- x + SD(MSA(LN(x)))
    x <- x + SD(MLP(LN(x)))
    """

    def __init__(
        self,
        dim: int,
        num_heads: int,
        mlp_ratio: float,
        mlp_dropout: float = 0.0,
        attn_dropout: float = 0.0,
        drop_path: float = 0.0,
        rng: np.random.Generator | None = None
    ):
        hidden = mlp_ratio * dim
        if hidden != int(hidden):
            raise ConfigError(f"mlp ratio {mlp_ratio} times dim {dim} is not an integer")
        self.norm1 = LayerNorm(dim)
        self.attn = MultiHeadSelfAttention(dim, num_heads, attn_dropout, rng=rng)
        self.norm2 = LayerNorm(dim)
        self.mlp = Mlp(dim, int(hidden), mlp_dropout, rng=rng)
        self.drop_path = StochasticDepth(drop_path)

    def forward(self, x: Tensor, train: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        x = x + self.drop_path(self.attn(self.norm1(x), train, rng), train, rng)
        x = x + self.drop_path(self.mlp(self.norm2(x), train, rng), train, rng)
        return x

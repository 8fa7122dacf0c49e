"""Positional embeddings and the class token."""

import logging

import numpy as np

from ..core import ops
from ..core.errors import ConfigError
from ..core.tensor import Tensor, default_dtype
from ..core.types import PEKind
from ..nn import init
from ..nn.module import Module, Parameter

logger = logging.getLogger(__name__)


def sinusoidal_table(length: int, dim: int) -> np.ndarray:
    """Fixed table with PE[pos, 2i] = sin(pos / 10000^(2i/d)), PE[pos, 2i+1] = cos(...)."""
    positions = np.arange(length, dtype=np.float64)[:, None]
    pair = np.arange(dim) // 2
    angles = positions / np.power(10000.0, 2.0 * pair / dim)[None, :]
    table = np.where(np.arange(dim) % 2 == 0, np.sin(angles), np.cos(angles))
    return table.astype(default_dtype())


class PositionalEmbedding(Module):
    """Additive per-token position signal.

    A learnable table holds ``max_length`` rows, of which the first n are
    used for an n-token sequence. The sinusoidal table is recomputed for any
    n. Kind ``none`` adds nothing.

    Attributes:
        kind: Embedding variant
        max_length: Rows in the learnable table
        table: Learnable Parameter [max_length, d], or None
    """

    def __init__(
        self,
        kind: PEKind,
        max_length: int,
        dim: int,
        rng: np.random.Generator | None = None
    ):
        self.kind = PEKind(kind)
        self.max_length = max_length
        self.dim = dim
        self.table = None
        if self.kind == PEKind.LEARNABLE:
            self.table = Parameter(init.trunc_normal((max_length, dim), rng), decay=False)

    def embedding(self, length: int) -> Tensor:
        """The [length, d] embedding added to a length-token sequence."""
        if self.kind == PEKind.LEARNABLE:
            if length > self.max_length:
                raise ConfigError(
                    f"learnable positional embedding has {self.max_length} positions but the "
                    f"input yields {length} tokens; learnable tables cannot be extended, use "
                    f"--pos-emb sinusoidal or none, or evaluate at the training image size"
                )
            return self.table[:length]
        if self.kind == PEKind.SINUSOIDAL:
            return Tensor(sinusoidal_table(length, self.dim))
        return Tensor(np.zeros((length, self.dim), dtype=default_dtype()))

    def forward(self, x: Tensor) -> Tensor:
        if self.kind == PEKind.NONE:
            return x
        return x + self.embedding(x.shape[1])


class ClassToken(Module):
    """Learnable token prepended to the sequence."""

    def __init__(self, dim: int, rng: np.random.Generator | None = None):
        self.token = Parameter(init.trunc_normal((1, 1, dim), rng), decay=False)

    def forward(self, x: Tensor) -> Tensor:
        b, _, d = x.shape
        return ops.concat([ops.broadcast_to(self.token, (b, 1, d)), x], axis=1)

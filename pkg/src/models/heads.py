"""Sequence pooling: SeqPool and class-token readout."""

import numpy as np

from ..core import ops
from ..core.tensor import Tensor
from ..nn.layers import Linear
from ..nn.module import Module


class SeqPool(Module):
    """Attention pooling z = softmax(g(x)^T) x over the sequence axis.

    g is a Linear(d, 1); the softmax weights form a convex combination of
    the token embeddings, so z stays inside their hull.
    """

    def __init__(self, dim: int, rng: np.random.Generator | None = None):
        self.attention_pool = Linear(dim, 1, rng=rng)

    def weights(self, x: Tensor) -> Tensor:
        """Pooling weights [b, 1, n]; each row sums to 1."""
        return ops.softmax(ops.swap_last(self.attention_pool(x)), axis=-1)

    def forward(self, x: Tensor) -> Tensor:
        b, _, d = x.shape
        return ops.matmul(self.weights(x), x).reshape(b, d)


class ClassTokenPool(Module):
    """Read out sequence slot 0."""

    def forward(self, x: Tensor) -> Tensor:
        return x[:, 0]

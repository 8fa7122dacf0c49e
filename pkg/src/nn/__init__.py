"""Layers: Module/Parameter base types, initializers, encoder building blocks."""

from .layers import (
    Dropout,
    EncoderBlock,
    LayerNorm,
    Linear,
    Mlp,
    MultiHeadSelfAttention,
    StochasticDepth,
)
from .module import Module, Parameter

__all__ = [
    "Module",
    "Parameter",
    "Linear",
    "LayerNorm",
    "Dropout",
    "StochasticDepth",
    "MultiHeadSelfAttention",
    "Mlp",
    "EncoderBlock",
]

"""Models: name registry, tokenizers, embeddings, pooling, classifiers, accounting."""

from .accounting import MacBreakdown, count_macs, count_params, mac_breakdown
from .classifier import TransformerClassifier, build_from_config, build_model
from .embeddings import ClassToken, PositionalEmbedding, sinusoidal_table
from .heads import ClassTokenPool, SeqPool
from .registry import (
    BACKBONES,
    COMPARISON_MODELS,
    VIT_BACKBONES,
    ModelConfig,
    parse_model_name,
    resolve_config,
)
from .tokenizer import ConvTokenizer, PatchTokenizer, sequence_length

__all__ = [
    "ModelConfig",
    "BACKBONES",
    "VIT_BACKBONES",
    "COMPARISON_MODELS",
    "parse_model_name",
    "resolve_config",
    "PatchTokenizer",
    "ConvTokenizer",
    "sequence_length",
    "PositionalEmbedding",
    "ClassToken",
    "sinusoidal_table",
    "SeqPool",
    "ClassTokenPool",
    "TransformerClassifier",
    "build_model",
    "build_from_config",
    "count_params",
    "count_macs",
    "mac_breakdown",
    "MacBreakdown",
]

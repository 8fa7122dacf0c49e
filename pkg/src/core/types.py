"""Core type definitions for the CCT engine.

This module defines the enumerations shared across packages:
- Family: model family of a named architecture
- PEKind: positional embedding variant
- Pooling: sequence-to-vector reduction before the classifier
- DatasetName: supported image datasets
- ExperimentKind: sweep experiments run by the harness
"""

from enum import Enum

import numpy as np

from .errors import ConfigError


class Family(str, Enum):
    """Model families understood by the name grammar."""
    VIT = "vit"             # original ViT backbones (ViT-12 = ViT-Base)
    VIT_LITE = "vit-lite"   # small ViT, patch tokenizer + class token
    CVT = "cvt"             # ViT-Lite with SeqPool
    CCT = "cct"             # CVT with a convolutional tokenizer


class PEKind(str, Enum):
    """Positional embedding variants."""
    LEARNABLE = "learnable"
    SINUSOIDAL = "sinusoidal"
    NONE = "none"


class Pooling(str, Enum):
    """How the encoder output is reduced to one vector per sample."""
    SEQPOOL = "seqpool"
    CLASS_TOKEN = "class-token"


class DatasetName(str, Enum):
    """Datasets with a built-in decoder."""
    MNIST = "mnist"
    FASHION_MNIST = "fashion-mnist"
    CIFAR10 = "cifar10"
    CIFAR100 = "cifar100"


class ExperimentKind(str, Enum):
    """Sweeps available through the ``experiment`` subcommand."""
    PE_ABLATION = "pe-ablation"
    SAMPLES_SWEEP = "samples-sweep"
    RESOLUTION_SWEEP = "resolution-sweep"


# Precision flag (bits) -> numpy scalar type
PRECISIONS: dict[int, type] = {
    32: np.float32,
    64: np.float64,
}


def dtype_for(precision: int) -> type:
    """Return the numpy scalar type for a precision given in bits."""
    if precision not in PRECISIONS:
        raise ConfigError(f"precision must be 32 or 64, got {precision}")
    return PRECISIONS[precision]

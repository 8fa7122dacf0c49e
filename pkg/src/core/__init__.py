"""Core components: Tensor, autodiff tape, kernels, errors, types."""

from . import ops
from .errors import (
    CheckpointError,
    ConfigError,
    ContractError,
    DataFormatError,
    DataIOError,
    DimensionError,
    DivergenceError,
    EngineError,
    TokenizationError,
)
from .gradcheck import grad_check
from .tensor import Tape, Tensor, backward, default_dtype, get_tape, no_grad, precision
from .types import DatasetName, ExperimentKind, Family, PEKind, Pooling

__all__ = [
    "ops",
    "Tensor",
    "Tape",
    "backward",
    "default_dtype",
    "get_tape",
    "no_grad",
    "precision",
    "grad_check",
    "EngineError",
    "DimensionError",
    "ContractError",
    "ConfigError",
    "TokenizationError",
    "DataIOError",
    "DataFormatError",
    "CheckpointError",
    "DivergenceError",
    "Family",
    "PEKind",
    "Pooling",
    "DatasetName",
    "ExperimentKind",
]

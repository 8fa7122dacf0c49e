"""Model size report: parameters, MACs and sequence length per named model."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import pandas as pd

from ..models.accounting import count_params, mac_breakdown
from ..models.classifier import build_model
from ..models.registry import COMPARISON_MODELS
from ..models.tokenizer import sequence_length
from ..storage.reports import JsonlWriter

logger = logging.getLogger(__name__)


@dataclass
class ModelStats:
    """Size of one model at one input resolution.

    Attributes:
        model: Canonical model name
        image_size: Input side length
        num_classes: Classifier outputs
        params: Learnable scalars
        macs: Multiply-accumulates per image, attention products excluded
        macs_with_attention: Same, attention products included
        sequence_length: Tokens entering the encoder (class token included)
        breakdown: Per-component MAC counts
    """
    model: str
    image_size: int
    num_classes: int
    params: int
    macs: int
    macs_with_attention: int
    sequence_length: int
    breakdown: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model,
            "image_size": self.image_size,
            "num_classes": self.num_classes,
            "params": self.params,
            "params_m": round(self.params / 1e6, 4),
            "macs": self.macs,
            "macs_g": round(self.macs / 1e9, 4),
            "macs_with_attention": self.macs_with_attention,
            "sequence_length": self.sequence_length,
            "breakdown": dict(self.breakdown),
        }


def model_stats(name: str, image_size: int = 32, num_classes: int = 10, in_channels: int = 3) -> ModelStats:
    """Count parameters and MACs without drawing random weights.

    Raises:
        ConfigError: Unparseable name or incompatible geometry
    """
    model = build_model(
        name,
        num_classes=num_classes,
        image_size=image_size,
        in_channels=in_channels,
        initialize=False,
    )
    config = model.config
    breakdown = mac_breakdown(model)
    tokens = sequence_length(config, image_size, image_size) + (1 if config.uses_class_token else 0)
    return ModelStats(
        model=config.name,
        image_size=image_size,
        num_classes=num_classes,
        params=count_params(model),
        macs=breakdown.total,
        macs_with_attention=breakdown.total_with_attention,
        sequence_length=tokens,
        breakdown=breakdown.to_dict(),
    )


def collect_stats(
    names: list[str] | None = None,
    image_size: int = 32,
    num_classes: int = 10,
    in_channels: int = 3
) -> list[ModelStats]:
    """Stats for each name; every model of the comparison table when names is empty."""
    return [
        model_stats(name, image_size, num_classes, in_channels)
        for name in (names or COMPARISON_MODELS)
    ]


def format_stats(stats: list[ModelStats]) -> str:
    """Human-readable table (params in millions, MACs in billions)."""
    frame = pd.DataFrame(
        {
            "model": [s.model for s in stats],
            "size": [s.image_size for s in stats],
            "tokens": [s.sequence_length for s in stats],
            "params (M)": [f"{s.params / 1e6:.2f}" for s in stats],
            "MACs (G)": [f"{s.macs / 1e9:.2f}" for s in stats],
            "MACs+attn (G)": [f"{s.macs_with_attention / 1e9:.2f}" for s in stats],
        }
    )
    return frame.to_string(index=False)


def write_stats(stats: list[ModelStats], path: str | Path) -> int:
    """Append one JSON line per model."""
    written = JsonlWriter(path).write_batch([s.to_dict() for s in stats])
    logger.info(f"Wrote {written} model stats to {path}")
    return written

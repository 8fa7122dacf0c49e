"""Evaluation passes over a dataset split.

Batches are evaluated on a thread pool; each worker runs forward passes
with recording disabled, and the per-batch sums are reduced in batch
order so the result does not depend on the worker count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import numpy as np

from ..core import ops
from ..core.errors import CheckpointError, ConfigError
from ..core.tensor import Tensor, default_dtype, no_grad, precision
from ..data.dataset import DatasetSplit
from ..data.stream import BatchStream
from ..models.classifier import TransformerClassifier, build_from_config
from ..models.registry import ModelConfig
from ..storage.checkpoint import Checkpoint, load_checkpoint

logger = logging.getLogger(__name__)


@dataclass
class EvalResult:
    """Top-1 accuracy and mean cross-entropy over a split."""
    loss: float
    accuracy: float
    correct: int
    total: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def accuracy(logits: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of rows whose argmax (first on ties) equals the label."""
    if len(labels) == 0:
        return 0.0
    return float(np.mean(np.argmax(logits, axis=-1) == labels))


def _batch_scores(
    model: TransformerClassifier,
    images: Tensor,
    labels: np.ndarray,
    dtype: type
) -> tuple[float, int]:
    with precision(dtype), no_grad():
        logits = model(images, train=False)
        logp = ops.log_softmax(logits, axis=-1).data
    loss_sum = float(-logp[np.arange(len(labels)), labels].sum(dtype=np.float64))
    correct = int((np.argmax(logits.data, axis=-1) == labels).sum())
    return loss_sum, correct


def evaluate(
    model: TransformerClassifier,
    split: DatasetSplit,
    batch_size: int = 256,
    threads: int = 1
) -> EvalResult:
    """Unaugmented full-split accuracy and cross-entropy.

    Args:
        model: Classifier (evaluated in eval mode)
        split: Split to score, in its stored order
        batch_size: Samples per forward pass
        threads: Worker threads scoring batches concurrently

    Returns:
        EvalResult
    """
    dtype = default_dtype()
    stream = BatchStream(split, batch_size, shuffle=False, prefetch=False)
    threads = max(1, threads or 1)

    if threads == 1:
        scores = [_batch_scores(model, images, labels, dtype) for images, labels in stream]
    else:
        with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="eval") as pool:
            futures = [
                pool.submit(_batch_scores, model, images, labels, dtype)
                for images, labels in stream
            ]
            scores = [f.result() for f in futures]

    total = len(split)
    loss_sum = 0.0
    correct = 0
    for batch_loss, batch_correct in scores:
        loss_sum += batch_loss
        correct += batch_correct
    result = EvalResult(
        loss=loss_sum / total if total else 0.0,
        accuracy=correct / total if total else 0.0,
        correct=correct,
        total=total,
    )
    logger.debug(f"Evaluated {total} samples: loss {result.loss:.4f}, acc {result.accuracy:.4f}")
    return result


def check_compatible(model: TransformerClassifier, split: DatasetSplit) -> None:
    """Raise ConfigError when the split cannot be scored by the model."""
    config = model.config
    if split.class_count != config.num_classes:
        raise ConfigError(
            f"{config.name} has {config.num_classes} outputs, {split.name.value} has {split.class_count} classes"
        )
    if split.channels != config.in_channels:
        raise ConfigError(
            f"{config.name} expects {config.in_channels} channels, {split.name.value} has {split.channels}"
        )


def load_model(path: str | Path) -> tuple[TransformerClassifier, Checkpoint]:
    """Rebuild a classifier from a checkpoint file.

    The architecture comes from the checkpoint metadata; the weights from
    its tensor table.

    Raises:
        CheckpointError: Unreadable checkpoint or missing model description
    """
    checkpoint = load_checkpoint(path)
    description = checkpoint.metadata.get("model_config")
    if not isinstance(description, dict):
        raise CheckpointError(f"{path}: checkpoint carries no model description")
    try:
        config = ModelConfig.from_dict(description)
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"{path}: malformed model description: {e}", cause=e) from e
    model = build_from_config(config, initialize=False)
    model.load_state_dict(checkpoint.tensors)
    logger.info(f"Loaded {checkpoint.model_name} (epoch {checkpoint.epoch}) from {path}")
    return model, checkpoint

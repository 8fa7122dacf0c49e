"""Label-smoothed cross-entropy."""

import numpy as np

from ..core import ops
from ..core.errors import ConfigError, ContractError, DimensionError
from ..core.tensor import Tensor


def smoothed_targets(labels: np.ndarray, num_classes: int, smoothing: float, dtype=np.float64) -> np.ndarray:
    """Target distribution: smoothing / K everywhere plus (1 - smoothing) on the true class."""
    target = np.full((len(labels), num_classes), smoothing / num_classes, dtype=dtype)
    target[np.arange(len(labels)), labels] += 1.0 - smoothing
    return target


def smoothed_cross_entropy(logits: Tensor, labels, smoothing: float = 0.1) -> Tensor:
    """Mean over the batch of -sum(target * log_softmax(logits)).

    Args:
        logits: Tensor [b, K]
        labels: Integer class indices, length b
        smoothing: Label-smoothing probability in [0, 1)

    Returns:
        Scalar loss tensor

    Raises:
        ContractError: If a label is outside [0, K)
    """
    if not 0.0 <= smoothing < 1.0:
        raise ConfigError(f"label smoothing must be in [0, 1), got {smoothing}")
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if logits.ndim != 2 or logits.shape[0] != len(labels):
        raise DimensionError("loss expects logits [b, K] and b labels", logits.shape, labels.shape)
    b, k = logits.shape
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ContractError(f"labels must be in [0, {k}), got range [{labels.min()}, {labels.max()}]")

    target = Tensor(smoothed_targets(labels, k, smoothing, dtype=logits.dtype))
    return -(ops.log_softmax(logits, axis=-1) * target).sum() / float(b)

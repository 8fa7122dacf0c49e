"""Optimization: AdamW, warmup + cosine schedule, smoothed cross-entropy."""

from .adamw import AdamW
from .loss import smoothed_cross_entropy, smoothed_targets
from .schedule import LrSchedule

__all__ = ["AdamW", "LrSchedule", "smoothed_cross_entropy", "smoothed_targets"]

"""Linear warmup followed by cosine annealing."""

import math
from dataclasses import dataclass

from ..core.errors import ConfigError


@dataclass(frozen=True)
class LrSchedule:
    """Learning rate as a function of the global step.

    The rate ramps linearly from 0 to ``base_lr`` over the warmup steps,
    then follows a half cosine down to ``min_lr`` over the remaining steps.
    With ``per_epoch`` the cosine phase is held constant within each epoch
    and the warmup ramps once per epoch.

    Attributes:
        base_lr: Peak learning rate
        warmup_epochs: Epochs of linear warmup
        total_epochs: Training length in epochs
        steps_per_epoch: Optimizer steps per epoch
        min_lr: Floor reached at the end of training
        per_epoch: Epoch granularity instead of per-step
    """
    base_lr: float
    warmup_epochs: int
    total_epochs: int
    steps_per_epoch: int
    min_lr: float = 0.0
    per_epoch: bool = False

    def __post_init__(self):
        if self.total_epochs < 1:
            raise ConfigError(f"total_epochs must be >= 1, got {self.total_epochs}")
        if not 0 <= self.warmup_epochs < self.total_epochs:
            raise ConfigError(
                f"warmup_epochs must be in [0, {self.total_epochs}), got {self.warmup_epochs}"
            )
        if self.steps_per_epoch < 1:
            raise ConfigError(f"steps_per_epoch must be >= 1, got {self.steps_per_epoch}")
        if self.min_lr < 0 or self.min_lr > self.base_lr:
            raise ConfigError(f"min_lr must be in [0, base_lr], got {self.min_lr}")

    @property
    def warmup_steps(self) -> int:
        return self.warmup_epochs * self.steps_per_epoch

    @property
    def total_steps(self) -> int:
        return self.total_epochs * self.steps_per_epoch

    def _cosine(self, progress: float) -> float:
        progress = min(max(progress, 0.0), 1.0)
        return self.min_lr + (self.base_lr - self.min_lr) * 0.5 * (1.0 + math.cos(math.pi * progress))

    def lr_at(self, step: int) -> float:
        """Learning rate at a global step (0-based; steps past the horizon hold min_lr)."""
        if step < 0:
            raise ConfigError(f"step must be >= 0, got {step}")
        if self.per_epoch:
            epoch = step // self.steps_per_epoch
            if epoch < self.warmup_epochs:
                return self.base_lr * (epoch + 1) / self.warmup_epochs
            span = max(1, self.total_epochs - self.warmup_epochs)
            return self._cosine((epoch - self.warmup_epochs) / span)
        if step < self.warmup_steps:
            return self.base_lr * step / self.warmup_steps
        span = max(1, self.total_steps - self.warmup_steps)
        return self._cosine((step - self.warmup_steps) / span)

"""Training loop with checkpointing and per-epoch metrics.

One thread owns the model and optimizer. Every random draw is keyed by
(seed, epoch[, sample]) or (seed, global step), and a checkpoint stores
the parameters, optimizer moments and step counter, so resuming from a
checkpoint continues exactly as the uninterrupted run would have.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import psutil

from ..config.schema import RunConfig
from ..core.errors import ConfigError, DivergenceError
from ..core.tensor import get_tape, precision
from ..core.types import dtype_for
from ..data.dataset import DatasetSplit, load_dataset, resize, subsample_per_class
from ..data.stream import AugmentPolicy, batches
from ..models.classifier import TransformerClassifier, build_model
from ..optim.adamw import AdamW
from ..optim.loss import smoothed_cross_entropy
from ..optim.schedule import LrSchedule
from ..storage.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from ..storage.metrics import EpochMetrics, MetricsWriter
from ..utils.rng import Domain, stream
from .evaluation import evaluate

logger = logging.getLogger(__name__)

LAST_CHECKPOINT = "last.ckpt"
BEST_CHECKPOINT = "best.ckpt"
SCHEDULE_STEP_KEY = "schedule.step"


@dataclass
class TrainResult:
    """Outcome of a training run."""
    model_name: str
    params: int
    epochs_run: int
    best_val_acc: float
    history: list[EpochMetrics] = field(default_factory=list)
    checkpoint_dir: str = ""
    wall_seconds: float = 0.0

    @property
    def final(self) -> EpochMetrics | None:
        return self.history[-1] if self.history else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model_name,
            "params": self.params,
            "epochs_run": self.epochs_run,
            "best_val_acc": self.best_val_acc,
            "final": self.final.to_dict() if self.final else None,
            "checkpoint_dir": self.checkpoint_dir,
            "wall_seconds": self.wall_seconds,
        }


def prepare_splits(
    config: RunConfig,
    raw: tuple[DatasetSplit, DatasetSplit] | None = None
) -> tuple[DatasetSplit, DatasetSplit]:
    """Load (or reuse) the dataset, then subsample and resize per the config."""
    train, test = raw if raw is not None else load_dataset(config.dataset_name, config.data_dir)
    if config.samples_per_class is not None:
        train = subsample_per_class(train, config.samples_per_class, config.seed)
    if config.image_size is not None:
        train = resize(train, config.image_size)
        test = resize(test, config.image_size)
    return train, test


class Trainer:
    """Warmup + cosine AdamW training with label smoothing.

    Example:
        config = RunConfig(model="cct-2/3x2", dataset="mnist", epochs=15)
        result = Trainer(config).fit()
        print(result.best_val_acc)
    """

    def __init__(
        self,
        config: RunConfig,
        train: DatasetSplit | None = None,
        test: DatasetSplit | None = None
    ):
        self.config = config
        if train is None or test is None:
            train, test = prepare_splits(config)
        self.train_split = train
        self.test_split = test
        self.checkpoint_dir = Path(config.checkpoint)
        self.dtype = dtype_for(config.precision)
        with precision(self.dtype):
            self.model: TransformerClassifier = build_model(
                config.model,
                num_classes=train.class_count,
                image_size=train.image_size,
                in_channels=train.channels,
                pe_kind=config.pe_kind,
                pooling=config.pooling,
                tuned=config.tuned,
                seed=config.seed,
            )
        self.optimizer = AdamW(
            self.model.named_parameters(), lr=config.lr, weight_decay=config.weight_decay
        )
        self.steps_per_epoch = -(-len(train) // config.batch_size)
        self.schedule = LrSchedule(
            base_lr=config.lr,
            warmup_epochs=config.warmup_epochs,
            total_epochs=config.epochs,
            steps_per_epoch=self.steps_per_epoch,
            min_lr=config.min_lr,
            per_epoch=config.lr_per_epoch,
        )
        self.policy = AugmentPolicy.for_dataset(train.name, enabled=config.augment)
        self.global_step = 0
        self.start_epoch = 0
        self.best_val_acc = -1.0

    # ------------------------------------------------------------------
    # Checkpoints
    # ------------------------------------------------------------------

    def _checkpoint(self, epoch: int) -> Checkpoint:
        tensors = self.model.state_dict()
        tensors.update(self.optimizer.state_dict())
        tensors[SCHEDULE_STEP_KEY] = np.array([self.global_step], dtype=np.int64)
        metadata = {
            "run": self.config.to_dict(),
            "model_config": self.model.config.to_dict(),
            "seed": self.config.seed,
            "global_step": self.global_step,
            "best_val_acc": self.best_val_acc,
            "dataset": self.train_split.name.value,
        }
        return Checkpoint(self.model.config.name, epoch, tensors, metadata)

    def restore(self, path: str | Path) -> None:
        """Load model, optimizer and schedule position from a checkpoint.

        Raises:
            ConfigError: If the checkpoint belongs to a different model
        """
        checkpoint = load_checkpoint(path)
        if checkpoint.model_name != self.model.config.name:
            raise ConfigError(
                f"checkpoint is for {checkpoint.model_name}, run is configured for {self.model.config.name}"
            )
        self.model.load_state_dict(checkpoint.tensors)
        self.optimizer.load_state_dict(checkpoint.tensors)
        self.global_step = int(checkpoint.tensors[SCHEDULE_STEP_KEY][0])
        self.start_epoch = checkpoint.epoch
        self.best_val_acc = float(checkpoint.metadata.get("best_val_acc", -1.0))
        logger.info(f"Resuming {checkpoint.model_name} after epoch {self.start_epoch} (step {self.global_step})")

    # ------------------------------------------------------------------
    # Loop
    # ------------------------------------------------------------------

    def train_epoch(self, epoch: int) -> tuple[float, float, float]:
        """One pass over the training split; returns (loss, accuracy, last lr)."""
        cfg = self.config
        loss_sum = 0.0
        correct = 0
        seen = 0
        lr = self.schedule.lr_at(self.global_step)

        for images, labels in batches(self.train_split, cfg.batch_size, cfg.seed, self.policy, epoch):
            lr = self.schedule.lr_at(self.global_step + 1)
            rng = stream(cfg.seed, Domain.DROPOUT, self.global_step)
            logits = self.model(images, train=True, rng=rng)
            loss = smoothed_cross_entropy(logits, labels, cfg.label_smoothing)
            loss_value = loss.item()
            if not math.isfinite(loss_value):
                get_tape().clear()
                raise DivergenceError(epoch + 1, self.global_step, lr, loss_value)

            self.optimizer.zero_grad()
            loss.backward()
            self.optimizer.step(lr)

            loss_sum += loss_value * len(labels)
            correct += int((np.argmax(logits.data, axis=-1) == labels).sum())
            seen += len(labels)
            self.global_step += 1
            if self.global_step % 50 == 0:
                logger.debug(f"step {self.global_step}: loss {loss_value:.4f}, lr {lr:.3e}")

        return loss_sum / max(1, seen), correct / max(1, seen), lr

    def fit(self, stop_after: int | None = None) -> TrainResult:
        """Train until ``config.epochs`` (or ``stop_after`` epochs) have completed.

        Args:
            stop_after: Stop once this many epochs are complete, keeping the
                schedule of the full run (simulates an interrupted run)

        Raises:
            DivergenceError: On a non-finite loss
        """
        with precision(self.dtype):
            return self._fit(stop_after)

    def _fit(self, stop_after: int | None) -> TrainResult:
        cfg = self.config
        if cfg.resume:
            self.restore(cfg.resume)
        writer = MetricsWriter(cfg.metrics_path, record_wall_time=cfg.record_wall_time)
        writer.start(resume_epoch=self.start_epoch if cfg.resume else None)

        last_epoch = cfg.epochs if stop_after is None else min(cfg.epochs, stop_after)
        history: list[EpochMetrics] = []
        run_start = time.perf_counter()
        logger.info(
            f"Training {self.model.config.name} on {self.train_split.name.value}: "
            f"{len(self.train_split)} samples, {self.steps_per_epoch} steps/epoch, "
            f"epochs {self.start_epoch + 1}..{last_epoch}"
        )

        for epoch in range(self.start_epoch, last_epoch):
            epoch_start = time.perf_counter()
            train_loss, train_acc, lr = self.train_epoch(epoch)
            val = evaluate(self.model, self.test_split, cfg.eval_batch_size, cfg.threads or 1)
            metrics = EpochMetrics(
                epoch=epoch + 1,
                train_loss=train_loss,
                train_acc=train_acc,
                val_loss=val.loss,
                val_acc=val.accuracy,
                lr=lr,
                wall_seconds=time.perf_counter() - epoch_start,
            )
            writer.append(metrics)
            history.append(metrics)
            logger.info(
                f"epoch {metrics.epoch}/{cfg.epochs}: train loss {train_loss:.4f} acc {train_acc:.4f} | "
                f"val loss {val.loss:.4f} acc {val.accuracy:.4f} | lr {lr:.3e} | {metrics.wall_seconds:.1f}s"
            )

            improved = val.accuracy > self.best_val_acc
            if improved:
                self.best_val_acc = val.accuracy
            checkpoint = self._checkpoint(epoch + 1)
            save_checkpoint(self.checkpoint_dir / LAST_CHECKPOINT, checkpoint)
            if improved:
                save_checkpoint(self.checkpoint_dir / BEST_CHECKPOINT, checkpoint)

        rss = psutil.Process().memory_info().rss
        logger.info(f"Resident memory at end of training: {rss / 2**20:.1f} MiB")

        return TrainResult(
            model_name=self.model.config.name,
            params=self.model.num_parameters(),
            epochs_run=len(history),
            best_val_acc=max(self.best_val_acc, 0.0),
            history=history,
            checkpoint_dir=str(self.checkpoint_dir),
            wall_seconds=time.perf_counter() - run_start,
        )

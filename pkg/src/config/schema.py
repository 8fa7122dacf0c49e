"""Run configuration schema.

RunConfig holds every knob of a training, evaluation or experiment run.
Defaults follow the training recipe: AdamW with lr 5e-4 and weight decay
3e-2, 10 warmup epochs, cosine annealing, label smoothing 0.1, batch 128,
200 epochs. The original ViT backbones (family ``vit``) default to lr 1e-4
and no weight decay instead.
"""

import json
import logging
from dataclasses import asdict, dataclass, fields
from typing import Any

from ..core.errors import ConfigError
from ..core.types import DatasetName, Family, PEKind, Pooling
from ..models.registry import parse_model_name

logger = logging.getLogger(__name__)

DEFAULT_LR = 5e-4
DEFAULT_WEIGHT_DECAY = 3e-2
VIT_LR = 1e-4
VIT_WEIGHT_DECAY = 0.0


@dataclass
class RunConfig:
    """Configuration of one run.

    Attributes:
        model: Model name, e.g. "cct-7/3x2"
        dataset: mnist, fashion-mnist, cifar10 or cifar100
        data_dir: Directory holding the dataset files
        epochs: Training epochs
        batch_size: Training batch size
        lr: Peak learning rate (None: family default)
        weight_decay: Decoupled weight decay (None: family default)
        warmup_epochs: Linear warmup length, kept below ``epochs``
        min_lr: Cosine floor
        lr_per_epoch: Hold the learning rate constant within an epoch
        label_smoothing: Smoothing probability of the loss
        pos_emb: learnable, sinusoidal or none
        pool: seqpool or class-token (None: family default)
        tuned: Use the tuned dropout / stochastic-depth rates
        seed: Seed for initialization, shuffling, augmentation and dropout
        image_size: Resize images to this side length (None: native size)
        samples_per_class: Subsample the training split (None: all)
        augment: Random crop + flip on the training stream
        checkpoint: Checkpoint directory (last.ckpt, best.ckpt)
        resume: Checkpoint file to resume from
        metrics: Metrics CSV path (None: <checkpoint>/metrics.csv)
        record_wall_time: Write elapsed seconds into the metrics CSV
        threads: Worker threads for BLAS and evaluation (None: all cores)
        eval_batch_size: Batch size of evaluation passes
        precision: 32 or 64 bit scalars
        repeats: Seeds per experiment setting (best-of-N)
        out: Experiment results CSV
        sweep_mode: train (retrain per size) or inference (resolution sweep)
        plot: Experiment plot path
        log_file: Optional log file
    """
    model: str = "cct-7/3x2"
    dataset: str = DatasetName.CIFAR10.value
    data_dir: str = "data"
    epochs: int = 200
    batch_size: int = 128
    lr: float | None = None
    weight_decay: float | None = None
    warmup_epochs: int = 10
    min_lr: float = 0.0
    lr_per_epoch: bool = False
    label_smoothing: float = 0.1
    pos_emb: str = PEKind.LEARNABLE.value
    pool: str | None = None
    tuned: bool = False
    seed: int = 0
    image_size: int | None = None
    samples_per_class: int | None = None
    augment: bool = True
    checkpoint: str = "checkpoints"
    resume: str | None = None
    metrics: str | None = None
    record_wall_time: bool = True
    threads: int | None = None
    eval_batch_size: int = 256
    precision: int = 32
    repeats: int = 1
    out: str = "results.csv"
    sweep_mode: str = "train"
    plot: str | None = None
    log_file: str | None = None

    def __post_init__(self):
        """Normalize names, fill family defaults and keep warmup inside the run."""
        self.model = self.model.strip().lower().replace("×", "x")
        self.dataset = self.dataset.strip().lower()
        self.pos_emb = self.pos_emb.strip().lower()
        if self.pool is not None:
            self.pool = self.pool.strip().lower()

        family = self.family
        if self.lr is None:
            self.lr = VIT_LR if family == Family.VIT else DEFAULT_LR
        if self.weight_decay is None:
            self.weight_decay = VIT_WEIGHT_DECAY if family == Family.VIT else DEFAULT_WEIGHT_DECAY

        if self.epochs >= 1 and self.warmup_epochs >= self.epochs:
            clamped = self.epochs - 1
            logger.warning(
                f"warmup_epochs {self.warmup_epochs} >= epochs {self.epochs}; using {clamped}"
            )
            self.warmup_epochs = clamped
        if self.warmup_epochs < 0:
            self.warmup_epochs = 0

    @property
    def family(self) -> Family | None:
        try:
            return parse_model_name(self.model)[0]
        except ConfigError:
            return None

    @property
    def pe_kind(self) -> PEKind:
        return PEKind(self.pos_emb)

    @property
    def pooling(self) -> Pooling | None:
        return Pooling(self.pool) if self.pool is not None else None

    @property
    def dataset_name(self) -> DatasetName:
        return DatasetName(self.dataset)

    @property
    def metrics_path(self) -> str:
        return self.metrics or f"{self.checkpoint.rstrip('/')}/metrics.csv"

    def replace(self, **changes: Any) -> "RunConfig":
        """Copy with the given fields changed."""
        data = self.to_dict()
        data.update(changes)
        return RunConfig.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, json_str: str) -> "RunConfig":
        return cls.from_dict(json.loads(json_str))


# Value type of every key, used to coerce text from files and environment
FIELD_TYPES: dict[str, type] = {
    "model": str,
    "dataset": str,
    "data_dir": str,
    "epochs": int,
    "batch_size": int,
    "lr": float,
    "weight_decay": float,
    "warmup_epochs": int,
    "min_lr": float,
    "lr_per_epoch": bool,
    "label_smoothing": float,
    "pos_emb": str,
    "pool": str,
    "tuned": bool,
    "seed": int,
    "image_size": int,
    "samples_per_class": int,
    "augment": bool,
    "checkpoint": str,
    "resume": str,
    "metrics": str,
    "record_wall_time": bool,
    "threads": int,
    "eval_batch_size": int,
    "precision": int,
    "repeats": int,
    "out": str,
    "sweep_mode": str,
    "plot": str,
    "log_file": str,
}

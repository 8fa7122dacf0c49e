"""Per-epoch metrics CSV."""

import csv
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import pandas as pd

from ..core.errors import DataIOError

logger = logging.getLogger(__name__)


@dataclass
class EpochMetrics:
    """One row of the metrics file."""
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float
    lr: float
    wall_seconds: float = 0.0

    def to_row(self) -> dict[str, str]:
        """Fixed-precision text so identical runs produce identical files."""
        return {
            "epoch": str(self.epoch),
            "train_loss": f"{self.train_loss:.6f}",
            "train_acc": f"{self.train_acc:.6f}",
            "val_loss": f"{self.val_loss:.6f}",
            "val_acc": f"{self.val_acc:.6f}",
            "lr": f"{self.lr:.8e}",
            "wall_seconds": f"{self.wall_seconds:.3f}",
        }

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


COLUMNS = [f.name for f in fields(EpochMetrics)]


class MetricsWriter:
    """Appends one CSV row per epoch.

    On resume the existing file is kept up to the checkpoint epoch and any
    later rows (written after the checkpoint) are dropped, so the finished
    file matches an uninterrupted run.

    Example:
        writer = MetricsWriter("runs/metrics.csv", record_wall_time=False)
        writer.start()
        writer.append(EpochMetrics(1, 2.1, 0.2, 2.0, 0.25, 5e-5))
    """

    def __init__(self, path: str | Path, record_wall_time: bool = True):
        self.path = Path(path)
        self.record_wall_time = record_wall_time

    def start(self, resume_epoch: int | None = None) -> None:
        """Create the file with a header, or trim it back to ``resume_epoch``.

        Raises:
            DataIOError: The file or its directory cannot be written
        """
        kept: list[dict[str, str]] = []
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if resume_epoch is not None and self.path.exists():
                with open(self.path, newline="", encoding="utf-8") as f:
                    kept = [row for row in csv.DictReader(f) if int(row["epoch"]) <= resume_epoch]
                logger.info(f"Resuming metrics at epoch {resume_epoch}: kept {len(kept)} rows")
            with open(self.path, "w", newline="", encoding="utf-8") as f:
                writer = csv.DictWriter(f, fieldnames=COLUMNS, lineterminator="\n")
                writer.writeheader()
                writer.writerows(kept)
        except OSError as e:
            raise DataIOError(f"cannot write metrics {self.path}: {e}", cause=e) from e

    def append(self, metrics: EpochMetrics) -> None:
        row = metrics.to_row()
        if not self.record_wall_time:
            row["wall_seconds"] = f"{0.0:.3f}"
        try:
            with open(self.path, "a", newline="", encoding="utf-8") as f:
                csv.DictWriter(f, fieldnames=COLUMNS, lineterminator="\n").writerow(row)
        except OSError as e:
            raise DataIOError(f"cannot append to metrics {self.path}: {e}", cause=e) from e


def read_metrics(path: str | Path) -> pd.DataFrame:
    """Load a metrics CSV as a DataFrame."""
    return pd.read_csv(path)

"""Storage: checkpoints, metrics CSV, JSON Lines reports, result tables."""

from .checkpoint import Checkpoint, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from .metrics import COLUMNS, EpochMetrics, MetricsWriter, read_metrics
from .reports import JsonlWriter, export_table

__all__ = [
    "Checkpoint",
    "encode_checkpoint",
    "decode_checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "COLUMNS",
    "EpochMetrics",
    "MetricsWriter",
    "read_metrics",
    "JsonlWriter",
    "export_table",
]

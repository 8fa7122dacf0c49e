"""Machine-readable reports: JSON Lines records and result tables.

Model statistics and experiment rows are appended as one JSON object per
line; experiment tables are also exported as CSV through pandas.
"""

import json
import logging
import threading
from pathlib import Path
from typing import Any

import pandas as pd

from ..core.errors import DataIOError

logger = logging.getLogger(__name__)


class JsonlWriter:
    """Thread-safe JSON Lines file.

    Example:
        report = JsonlWriter("runs/stats.jsonl")
        report.write({"model": "cct-7/3x2", "params": 3853834})
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def write(self, record: dict[str, Any]) -> None:
        self.write_batch([record])

    def write_batch(self, records: list[dict[str, Any]]) -> int:
        if not records:
            return 0
        content = "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in records)
        with self._lock:
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(content)
            except OSError as e:
                raise DataIOError(f"failed to write report {self.path}: {e}", cause=e) from e
        return len(records)


def export_table(rows: list[dict[str, Any]], path: str | Path, columns: list[str] | None = None) -> pd.DataFrame:
    """Write rows to a CSV file (column order fixed by ``columns``)."""
    frame = pd.DataFrame(rows, columns=columns)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
    except OSError as e:
        raise DataIOError(f"failed to write {path}: {e}", cause=e) from e
    logger.info(f"Exported {len(frame)} rows to {path}")
    return frame

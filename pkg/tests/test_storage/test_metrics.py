"""Tests for the per-epoch metrics CSV."""

from pathlib import Path

import pytest

from src.core.errors import DataIOError
from src.storage.metrics import COLUMNS, EpochMetrics, MetricsWriter, read_metrics


def row(epoch):
    return EpochMetrics(epoch, 2.0 / epoch, 0.1 * epoch, 2.1 / epoch, 0.1 * epoch, 5e-4, wall_seconds=12.5)


class TestMetricsWriter:

    def test_header_and_rows(self, temp_dir):
        path = Path(temp_dir) / "metrics.csv"
        writer = MetricsWriter(path)
        writer.start()
        writer.append(row(1))
        writer.append(row(2))
        frame = read_metrics(path)
        assert list(frame.columns) == COLUMNS
        assert list(frame["epoch"]) == [1, 2]
        assert frame["wall_seconds"].iloc[0] == pytest.approx(12.5)

    def test_wall_time_disabled_writes_zero(self, temp_dir):
        path = Path(temp_dir) / "metrics.csv"
        writer = MetricsWriter(path, record_wall_time=False)
        writer.start()
        writer.append(row(1))
        assert path.read_text().splitlines()[1].endswith(",0.000")

    def test_resume_drops_later_rows(self, temp_dir):
        path = Path(temp_dir) / "metrics.csv"
        writer = MetricsWriter(path, record_wall_time=False)
        writer.start()
        for epoch in (1, 2, 3):
            writer.append(row(epoch))
        full = path.read_text()

        writer.start(resume_epoch=2)
        assert list(read_metrics(path)["epoch"]) == [1, 2]
        writer.append(row(3))
        assert path.read_text() == full

    def test_start_without_resume_truncates(self, temp_dir):
        path = Path(temp_dir) / "metrics.csv"
        writer = MetricsWriter(path)
        writer.start()
        writer.append(row(1))
        writer.start()
        assert path.read_text() == ",".join(COLUMNS) + "\n"

    def test_fixed_precision_row(self):
        text = EpochMetrics(1, 1.0, 0.5, 1.0, 0.5, 5e-4).to_row()
        assert text["train_loss"] == "1.000000"
        assert text["lr"] == "5.00000000e-04"

    def test_unwritable_directory(self, temp_dir):
        blocker = Path(temp_dir) / "blocker"
        blocker.write_text("")
        with pytest.raises(DataIOError, match="cannot write metrics"):
            MetricsWriter(blocker / "metrics.csv").start()

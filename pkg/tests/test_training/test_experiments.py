"""Tests for the experiment sweeps."""

from pathlib import Path

import pandas as pd
import pytest

from src.config.schema import RunConfig
from src.core.errors import ConfigError
from src.training.experiments import (
    MIN_NOISE_MARGIN,
    RESULT_COLUMNS,
    ExperimentRow,
    pe_ablation,
    plot_results,
    resolution_sweep,
    run_experiment,
    samples_sweep,
)


def sweep_config(temp_dir, **changes) -> RunConfig:
    settings = dict(
        model="cct-2/3x2",
        dataset="mnist",
        epochs=1,
        batch_size=16,
        eval_batch_size=16,
        checkpoint=str(Path(temp_dir) / "ckpt"),
        record_wall_time=False,
        out=str(Path(temp_dir) / "results.csv"),
    )
    settings.update(changes)
    return RunConfig(**settings)


class TestExperimentRow:

    def test_noise_margin_floor(self):
        row = ExperimentRow("pe-ablation", "cct-2/3x2", "none")
        row.record([0.5, 0.502])
        assert row.best_val_acc == 0.502
        assert row.noise_margin == MIN_NOISE_MARGIN

    def test_noise_margin_follows_spread(self):
        row = ExperimentRow("pe-ablation", "cct-2/3x2", "none")
        row.record([0.4, 0.5, 0.45])
        assert row.spread == pytest.approx(0.1)
        assert row.noise_margin == pytest.approx(0.1)


class TestSweeps:

    def test_pe_ablation_rows(self, tiny_splits, temp_dir):
        rows = pe_ablation(sweep_config(temp_dir), raw=tiny_splits)
        assert [r.setting for r in rows] == ["learnable", "sinusoidal", "none"]
        assert not any(r.failed for r in rows)
        assert rows[0].params > rows[2].params

    def test_samples_sweep_reports_oversized_counts(self, tiny_splits, temp_dir):
        rows = samples_sweep(sweep_config(temp_dir), raw=tiny_splits, counts=(2, 4, 9))
        assert [r.failed for r in rows] == [False, False, True]
        assert rows[2].error.startswith("error:config:")
        assert rows[2].best_val_acc is None

    def test_resolution_sweep_reports_indivisible_patches(self, tiny_splits, temp_dir):
        config = sweep_config(temp_dir, model="vit-lite-2/4")
        rows = resolution_sweep(config, raw=tiny_splits, sizes=(12, 10))
        assert not rows[0].failed
        assert rows[1].error.startswith("error:tokenization:")

    def test_inference_sweep_with_learnable_table(self, tiny_splits, temp_dir):
        config = sweep_config(temp_dir, model="cvt-2/4", sweep_mode="inference")
        rows = resolution_sweep(config, raw=tiny_splits, sizes=(12, 16))
        assert not rows[0].failed
        assert "positional" in rows[1].error

    def test_inference_sweep_with_sinusoidal_table(self, tiny_splits, temp_dir):
        config = sweep_config(temp_dir, model="cvt-2/4", sweep_mode="inference", pos_emb="sinusoidal")
        rows = resolution_sweep(config, raw=tiny_splits, sizes=(12, 16))
        assert not any(r.failed for r in rows)
        assert rows[0].params == rows[1].params

    def test_unknown_sweep_mode(self, tiny_splits, temp_dir):
        with pytest.raises(ConfigError):
            resolution_sweep(sweep_config(temp_dir, sweep_mode="both"), raw=tiny_splits)

    def test_repeats_use_consecutive_seeds(self, tiny_splits, temp_dir):
        rows = samples_sweep(sweep_config(temp_dir, repeats=2, seed=5), raw=tiny_splits, counts=(2,))
        assert rows[0].seeds == "5 6"


class TestRunExperiment:

    def test_results_csv(self, mnist_dir, temp_dir):
        config = sweep_config(temp_dir, data_dir=str(mnist_dir), plot=str(Path(temp_dir) / "plot.png"))
        table = run_experiment("samples-sweep", config)
        # 3 samples per class cannot satisfy any standard count
        assert table["error"].str.startswith("error:config:").all()
        written = pd.read_csv(config.out)
        assert list(written.columns) == RESULT_COLUMNS
        assert len(written) == 6

    def test_plot_written(self, temp_dir):
        table = pd.DataFrame([
            ExperimentRow("samples-sweep", "cct-2/3x2", "500", best_val_acc=0.8, noise_margin=0.01).to_dict(),
            ExperimentRow("samples-sweep", "cct-2/3x2", "1000", best_val_acc=0.9, noise_margin=0.01).to_dict(),
            ExperimentRow("samples-sweep", "cct-2/3x2", "2000", error="error:config: too few").to_dict(),
        ])
        path = Path(temp_dir) / "plots" / "sweep.png"
        plot_results(table, path, title="samples")
        assert path.exists()

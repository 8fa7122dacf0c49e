"""Tests for the command-line entry point."""

import json
from pathlib import Path

import pytest

import main as cli
from src.training.gradcheck_suite import GradCheckOutcome


class TestCli:

    def test_stats(self, temp_dir, capsys):
        out = Path(temp_dir) / "stats.jsonl"
        assert cli.main(["stats", "--model", "cct-7/3x2", "--model", "cct-2/3x2", "--out", str(out)]) == 0
        assert "cct-2/3x2" in capsys.readouterr().out
        assert len(out.read_text().splitlines()) == 2

    def test_config_error_exit_code(self, temp_dir, capsys):
        code = cli.main(["stats", "--model", "cct-5/3x2", "--out", str(Path(temp_dir) / "s.jsonl")])
        assert code == 2
        assert capsys.readouterr().err.startswith("error:config:")

    def test_missing_data_exit_code(self, temp_dir, capsys):
        code = cli.main([
            "train", "--model", "cct-2/3x2", "--dataset", "mnist",
            "--data-dir", str(Path(temp_dir) / "nowhere"), "--epochs", "1",
        ])
        assert code == 3
        assert capsys.readouterr().err.strip().splitlines()[-1].startswith("error:io:")

    def test_train_then_eval(self, mnist_dir, temp_dir, capsys):
        ckpt = Path(temp_dir) / "run"
        code = cli.main([
            "train", "--model", "cct-2/3x2", "--dataset", "mnist", "--data-dir", str(mnist_dir),
            "--epochs", "1", "--batch-size", "16", "--checkpoint", str(ckpt), "--no-wall-time",
        ])
        assert code == 0
        summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert summary["epochs_run"] == 1
        assert len((ckpt / "metrics.csv").read_text().splitlines()) == 2

        code = cli.main([
            "eval", str(ckpt / "last.ckpt"), "--dataset", "mnist", "--data-dir", str(mnist_dir),
        ])
        assert code == 0
        report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert report["model"] == "cct-2/3x2"
        assert report["total"] == 20

    def test_eval_on_incompatible_dataset(self, mnist_dir, cifar_dir, temp_dir, capsys):
        ckpt = Path(temp_dir) / "run"
        cli.main([
            "train", "--model", "cct-2/3x2", "--dataset", "mnist", "--data-dir", str(mnist_dir),
            "--epochs", "1", "--batch-size", "16", "--checkpoint", str(ckpt),
        ])
        capsys.readouterr()
        code = cli.main(["eval", str(ckpt / "last.ckpt"), "--dataset", "cifar10", "--data-dir", str(cifar_dir)])
        assert code == 2
        assert "channels" in capsys.readouterr().err

    def test_gradcheck_failure_exit_code(self, monkeypatch, capsys):
        monkeypatch.setattr(cli, "run_suite", lambda seed: [GradCheckOutcome("gelu", 0.5, 1e-5, False)])
        assert cli.main(["gradcheck"]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_env_override(self, mnist_dir, temp_dir, monkeypatch, capsys):
        monkeypatch.setenv("CCT_EPOCHS", "2")
        ckpt = Path(temp_dir) / "env"
        code = cli.main([
            "train", "--model", "cct-2/3x2", "--dataset", "mnist", "--data-dir", str(mnist_dir),
            "--batch-size", "16", "--checkpoint", str(ckpt), "--no-wall-time",
        ])
        assert code == 0
        assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["epochs_run"] == 2

    def test_unwritable_metrics_exit_code(self, mnist_dir, temp_dir, capsys):
        blocker = Path(temp_dir) / "blocker"
        blocker.write_text("")
        code = cli.main([
            "train", "--model", "cct-2/3x1", "--dataset", "mnist", "--data-dir", str(mnist_dir),
            "--epochs", "1", "--batch-size", "16", "--checkpoint", str(Path(temp_dir) / "run"),
            "--metrics", str(blocker / "metrics.csv"),
        ])
        assert code == 3
        err = capsys.readouterr().err.strip().splitlines()
        assert [line for line in err if line.startswith("error:")] == err[-1:]
        assert err[-1].startswith("error:io:")
        assert "metrics" in err[-1]

    def test_stray_os_error_is_reported(self, monkeypatch, capsys):
        def broken(seed):
            raise PermissionError("denied")

        monkeypatch.setattr(cli, "run_suite", broken)
        assert cli.main(["gradcheck"]) == 3
        assert capsys.readouterr().err.startswith("error:io: denied")

    @pytest.mark.parametrize("flag,value", [
        ("--repeats", "4"), ("--out", "x.csv"), ("--sweep-mode", "inference"), ("--plot", "x.png"),
    ])
    def test_sweep_flags_only_on_experiment(self, flag, value, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.build_parser().parse_args(["train", "--model", "cct-2/3x2", flag, value])
        assert exc.value.code == 2
        args = cli.build_parser().parse_args(["experiment", "pe-ablation", flag, value])
        assert getattr(args, flag[2:].replace("-", "_")) is not None

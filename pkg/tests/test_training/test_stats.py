"""Tests for the model size report."""

import json
from pathlib import Path

import pytest

from src.core.errors import ConfigError, TokenizationError
from src.training.stats import collect_stats, format_stats, model_stats, write_stats


class TestModelStats:

    def test_cct(self):
        stats = model_stats("cct-7/3x2")
        assert stats.params == pytest.approx(3.859e6, rel=0.02)
        assert stats.sequence_length == 64
        assert stats.macs_with_attention > stats.macs

    def test_class_token_counted_in_sequence(self):
        assert model_stats("vit-lite-7/4").sequence_length == 65

    def test_single_channel_input(self):
        assert model_stats("cct-2/3x2", image_size=28, in_channels=1).params < model_stats("cct-2/3x2").params

    def test_bad_name(self):
        with pytest.raises(ConfigError):
            model_stats("transformer-7")

    def test_indivisible_resolution(self):
        with pytest.raises(TokenizationError):
            model_stats("vit-lite-7/16", image_size=24)


class TestReport:

    def test_table_and_jsonl(self, temp_dir):
        stats = collect_stats(["cct-7/3x2", "cvt-7/4"])
        table = format_stats(stats)
        assert "cct-7/3x2" in table and "cvt-7/4" in table

        path = Path(temp_dir) / "stats.jsonl"
        assert write_stats(stats, path) == 2
        records = [json.loads(line) for line in path.read_text().splitlines()]
        assert records[0]["model"] == "cct-7/3x2"
        assert records[1]["breakdown"]["total"] == records[1]["macs"]

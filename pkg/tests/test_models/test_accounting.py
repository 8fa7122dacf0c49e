"""Parameter and MAC counts against published model sizes."""

import pytest

from src.models.accounting import count_macs, count_params, mac_breakdown
from src.models.classifier import build_model
from src.models.registry import resolve_config


class TestParameterCounts:

    @pytest.mark.parametrize("name,millions", [
        ("cct-2/3x2", 0.28),
        ("cct-7/3x1", 3.76),
        ("cct-7/3x2", 3.85),
        ("vit-lite-7/16", 3.89),
        ("cvt-7/4", 3.72),
        ("vit-lite-6/4", 3.19),
        ("vit-12/16", 85.63),
    ])
    def test_published_sizes(self, name, millions):
        model = build_model(name, num_classes=10, image_size=32, initialize=False)
        assert count_params(model) == pytest.approx(millions * 1e6, rel=0.02)

    def test_head_scales_with_classes(self):
        ten = count_params(build_model("cct-2/3x2", num_classes=10, initialize=False))
        hundred = count_params(build_model("cct-2/3x2", num_classes=100, initialize=False))
        assert hundred - ten == 90 * 129

    @pytest.mark.parametrize("name", ["cct-2/3x2", "cct-7/3x2"])
    def test_class_token_instead_of_seqpool(self, name):
        # +d class token, +d positional row, -(d + 1) for the pooling scorer
        seqpool = build_model(name, initialize=False)
        class_token = build_model(name, pooling="class-token", initialize=False)
        d = seqpool.config.embed_dim
        assert count_params(class_token) - count_params(seqpool) == d - 1

    def test_tokenizer_size_independent_of_image(self):
        small = build_model("cct-7/3x2", image_size=32, pe_kind="sinusoidal", initialize=False)
        large = build_model("cct-7/3x2", image_size=48, pe_kind="sinusoidal", initialize=False)
        assert small.tokenizer.num_parameters() == large.tokenizer.num_parameters()
        assert count_params(small) == count_params(large)


class TestMacCounts:

    def test_cct_single_conv_block(self):
        assert count_macs(resolve_config("cct-7/3x1")) == pytest.approx(0.95e9, rel=0.10)

    def test_cct_two_conv_blocks(self):
        assert count_macs(resolve_config("cct-7/3x2")) == pytest.approx(0.28e9, rel=0.10)

    def test_extra_block_shrinks_compute(self):
        ratio = count_macs(resolve_config("cct-7/3x1")) / count_macs(resolve_config("cct-7/3x2"))
        assert 3.0 <= ratio <= 3.6

    def test_vit_base(self):
        assert count_macs(resolve_config("vit-12/16")) == pytest.approx(0.43e9, rel=0.10)

    def test_attention_reported_separately(self):
        breakdown = mac_breakdown(resolve_config("cct-7/3x2"))
        assert breakdown.attention == 7 * 2 * 64 * 64 * 256
        assert breakdown.total_with_attention == breakdown.total + breakdown.attention
        assert breakdown.to_dict()["total"] == breakdown.total

    def test_larger_image_costs_more(self):
        config = resolve_config("cct-7/3x2", pe_kind="sinusoidal")
        assert count_macs(config, 64) > count_macs(config, 32)

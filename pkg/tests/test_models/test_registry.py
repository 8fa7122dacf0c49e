"""Tests for model-name parsing, config resolution and tokenizer geometry."""

import pytest
from hypothesis import given

from src.core.errors import ConfigError, TokenizationError
from src.core.types import Family, PEKind, Pooling
from src.models.registry import ModelConfig, parse_model_name, resolve_config
from src.models.tokenizer import conv_grid, patch_grid, sequence_length
from tests.conftest import model_name_strategy


class TestParseModelName:

    @pytest.mark.parametrize("name,expected", [
        ("cct-7/3x2", (Family.CCT, 7, 3, 2)),
        ("CCT-7/3×1", (Family.CCT, 7, 3, 1)),
        ("cct-2/3", (Family.CCT, 2, 3, None)),
        ("vit-lite-7/16", (Family.VIT_LITE, 7, 16, None)),
        ("cvt-7/4", (Family.CVT, 7, 4, None)),
        ("vit-12/16", (Family.VIT, 12, 16, None)),
    ])
    def test_valid_names(self, name, expected):
        assert parse_model_name(name) == expected

    @pytest.mark.parametrize("name", ["cct7/3x2", "resnet-18/3", "cct-7/", "", "vit-lite-7/4x"])
    def test_invalid_names(self, name):
        with pytest.raises(ConfigError):
            parse_model_name(name)


class TestResolveConfig:

    def test_cct_defaults(self):
        config = resolve_config("cct-7/3x2")
        assert config.name == "cct-7/3x2"
        assert (config.num_heads, config.mlp_ratio, config.embed_dim) == (4, 2, 256)
        assert config.pooling == Pooling.SEQPOOL
        assert config.pe_kind == PEKind.LEARNABLE
        assert config.uses_conv_tokenizer and not config.uses_class_token
        assert (config.mlp_dropout, config.attn_dropout, config.stochastic_depth) == (0.1, 0.0, 0.0)

    def test_block_count_defaults_to_one(self):
        assert resolve_config("cct-2/3").name == "cct-2/3x1"

    def test_tuned_rates(self):
        config = resolve_config("cvt-7/4", tuned=True)
        assert (config.mlp_dropout, config.attn_dropout, config.stochastic_depth) == (0.0, 0.1, 0.1)

    def test_vit_lite_uses_class_token(self):
        config = resolve_config("vit-lite-7/4")
        assert config.pooling == Pooling.CLASS_TOKEN
        assert config.uses_class_token

    def test_cct_without_seqpool(self):
        assert resolve_config("cct-7/3x2", pooling="class-token").uses_class_token

    def test_unknown_backbone(self):
        with pytest.raises(ConfigError, match="backbone"):
            resolve_config("cct-5/3x2")

    def test_blocks_only_for_cct(self):
        with pytest.raises(ConfigError):
            resolve_config("cvt-7/4x2")

    def test_unknown_pe_kind(self):
        with pytest.raises(ConfigError):
            resolve_config("cvt-7/4", pe_kind="rotary")

    @given(model_name_strategy)
    def test_config_dict_round_trip(self, name):
        config = resolve_config(name, num_classes=100, image_size=(28, 28), in_channels=1)
        assert ModelConfig.from_dict(config.to_dict()) == config


class TestTokenizerGeometry:

    def test_patch_grid(self):
        assert patch_grid(32, 32, 4) == (8, 8)

    def test_indivisible_patch(self):
        with pytest.raises(TokenizationError):
            patch_grid(28, 28, 16)

    def test_tokenization_error_is_config_error(self):
        assert issubclass(TokenizationError, ConfigError)

    @pytest.mark.parametrize("size,kernel,blocks,expected", [
        (32, 3, 1, (16, 16)),
        (32, 3, 2, (8, 8)),
        (28, 3, 2, (7, 7)),
        (32, 7, 1, (16, 16)),
        (2, 3, 1, (1, 1)),
    ])
    def test_conv_grid(self, size, kernel, blocks, expected):
        assert conv_grid(size, size, kernel, blocks) == expected

    def test_conv_stack_collapse(self):
        with pytest.raises(TokenizationError):
            conv_grid(2, 2, 3, 2)

    def test_sequence_lengths(self):
        assert sequence_length(resolve_config("cct-7/3x2"), 32, 32) == 64
        assert sequence_length(resolve_config("cct-7/3x1"), 32, 32) == 256
        assert sequence_length(resolve_config("vit-lite-7/4"), 32, 32) == 64
        assert sequence_length(resolve_config("cvt-7/16"), 32, 32) == 4

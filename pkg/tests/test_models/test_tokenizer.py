"""Tests for the patch and convolutional tokenizers."""

import numpy as np
import pytest

from src.core.tensor import Tensor, no_grad, precision
from src.models.registry import resolve_config
from src.models.tokenizer import ConvTokenizer, PatchTokenizer, sequence_length


def one_hot_image(height, width, row, col):
    image = np.zeros((1, 1, height, width))
    image[0, 0, row, col] = 1.0
    return Tensor(image)


def active_tokens(tokens):
    return set(np.flatnonzero(np.abs(tokens.data[0]).sum(axis=-1)).tolist())


class TestSequenceLength:

    @pytest.mark.parametrize("blocks", [1, 2])
    def test_conv_stack_matches_output(self, rng, blocks):
        config = resolve_config(f"cct-2/3x{blocks}", in_channels=1)
        tokenizer = ConvTokenizer(3, blocks, 1, 8, rng=rng)
        with no_grad():
            for size in range(16, 65):
                tokens = tokenizer(Tensor(np.zeros((1, 1, size, size))))
                assert tokens.shape[1] == sequence_length(config, size, size), size

    def test_patches_match_output(self, rng):
        config = resolve_config("cvt-2/4", in_channels=1)
        tokenizer = PatchTokenizer(4, 1, 8, rng=rng)
        with no_grad():
            for size in range(16, 65, 4):
                tokens = tokenizer(Tensor(np.zeros((1, 1, size, size))))
                assert tokens.shape[1] == sequence_length(config, size, size), size

    def test_non_square_image(self):
        assert sequence_length(resolve_config("cct-7/3x2"), 28, 64) == 7 * 16

    def test_patch_vector_length(self, rng):
        tokenizer = PatchTokenizer(4, 3, 8, rng=rng)
        assert tokenizer.proj.weight.shape == (8, 48)
        assert tokenizer(Tensor(np.zeros((1, 3, 32, 32)))).shape == (1, 64, 8)


class TestTokenOrder:

    def test_patches_row_major(self, rng):
        with precision(np.float64):
            tokenizer = PatchTokenizer(4, 1, 6, rng=rng)
            tokens = tokenizer(one_hot_image(8, 12, 5, 9))
        # patch row 1, patch column 2 of a 2 x 3 grid
        assert active_tokens(tokens) == {5}

    def test_conv_feature_map_row_major(self, rng):
        with precision(np.float64):
            tokenizer = ConvTokenizer(3, 1, 1, 4, rng=rng)
            weight = tokenizer.blocks[0].weight
            weight.data = np.abs(weight.data) + 0.01
            tokens = tokenizer(one_hot_image(16, 16, 2, 13))
        # the 3x3 conv response at rows 1..3, cols 12..14 pools into rows 0..2, cols 6..7 of the 8x8 map
        assert active_tokens(tokens) == {r * 8 + c for r in (0, 1, 2) for c in (6, 7)}

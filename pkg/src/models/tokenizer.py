"""Image tokenizers and sequence-length arithmetic.

PatchTokenizer cuts the image into non-overlapping P x P patches, ordered
top-left to bottom-right, flattens each channel-major and projects it to
the embedding size. ConvTokenizer runs a stack of
conv(stride 1, padding k // 2) -> ReLU -> maxpool(3, stride 2, padding 1)
blocks and reads the final feature map out row by row.
"""

import logging

import numpy as np

from ..core import ops
from ..core.errors import TokenizationError
from ..core.tensor import Tensor
from ..nn import init
from ..nn.layers import Linear
from ..nn.module import Module, Parameter
from .registry import CONV_CHANNELS, POOL_KERNEL, POOL_PADDING, POOL_STRIDE, ModelConfig

logger = logging.getLogger(__name__)


def patch_grid(height: int, width: int, patch_size: int) -> tuple[int, int]:
    """Patch rows and columns for an image, rejecting indivisible sizes."""
    if height % patch_size or width % patch_size:
        raise TokenizationError(
            f"image {height}x{width} is not divisible by patch size {patch_size}"
        )
    return height // patch_size, width // patch_size


def conv_block_extent(size: int, kernel: int) -> int:
    """Spatial extent after one convolutional block."""
    conv = ops.output_extent(size, kernel, 1, kernel // 2)
    return ops.output_extent(conv, POOL_KERNEL, POOL_STRIDE, POOL_PADDING)


def conv_grid(height: int, width: int, kernel: int, blocks: int) -> tuple[int, int]:
    """Final feature-map size of a convolutional stack.

    Raises:
        TokenizationError: If a block would receive a map less than 2 pixels
            on a side (it can no longer downsample)
    """
    h, w = height, width
    for i in range(blocks):
        if h < 2 or w < 2:
            raise TokenizationError(
                f"{blocks} blocks of {kernel}x{kernel} convolutions collapse a "
                f"{height}x{width} image (block {i + 1} receives {h}x{w})"
            )
        h, w = conv_block_extent(h, kernel), conv_block_extent(w, kernel)
    return h, w


def sequence_length(config: ModelConfig, height: int, width: int) -> int:
    """Number of tokens the tokenizer emits for an image (class token excluded)."""
    if config.uses_conv_tokenizer:
        h, w = conv_grid(height, width, config.kernel_size, config.conv_blocks)
    else:
        h, w = patch_grid(height, width, config.patch_size)
    return h * w


class PatchTokenizer(Module):
    """Non-overlapping patch embedding."""

    def __init__(
        self,
        patch_size: int,
        in_channels: int,
        embed_dim: int,
        rng: np.random.Generator | None = None
    ):
        self.patch_size = patch_size
        self.in_channels = in_channels
        self.proj = Linear(in_channels * patch_size * patch_size, embed_dim, rng=rng)

    def forward(self, x: Tensor) -> Tensor:
        b, c, h, w = x.shape
        p = self.patch_size
        gh, gw = patch_grid(h, w, p)
        patches = x.reshape(b, c, gh, p, gw, p).transpose(0, 2, 4, 1, 3, 5)
        return self.proj(patches.reshape(b, gh * gw, c * p * p))


class ConvBlock(Module):
    """conv2d (no bias) -> ReLU -> maxpool."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        rng: np.random.Generator | None = None
    ):
        self.kernel_size = kernel_size
        self.weight = Parameter(
            init.trunc_normal((out_channels, in_channels, kernel_size, kernel_size), rng)
        )

    def forward(self, x: Tensor) -> Tensor:
        y = ops.conv2d(x, self.weight, stride=1, padding=self.kernel_size // 2)
        return ops.maxpool2d(ops.relu(y), POOL_KERNEL, POOL_STRIDE, POOL_PADDING)


class ConvTokenizer(Module):
    """Stack of convolutional blocks; non-final blocks use 64 filters."""

    def __init__(
        self,
        kernel_size: int,
        num_blocks: int,
        in_channels: int,
        embed_dim: int,
        rng: np.random.Generator | None = None
    ):
        self.kernel_size = kernel_size
        channels = [in_channels] + [CONV_CHANNELS] * (num_blocks - 1) + [embed_dim]
        self.blocks = [
            ConvBlock(channels[i], channels[i + 1], kernel_size, rng=rng)
            for i in range(num_blocks)
        ]

    def forward(self, x: Tensor) -> Tensor:
        conv_grid(x.shape[2], x.shape[3], self.kernel_size, len(self.blocks))
        for block in self.blocks:
            x = block(x)
        b, d, h, w = x.shape
        return x.reshape(b, d, h * w).transpose(0, 2, 1)


def build_tokenizer(config: ModelConfig, rng: np.random.Generator | None = None) -> Module:
    if config.uses_conv_tokenizer:
        return ConvTokenizer(
            config.kernel_size, config.conv_blocks, config.in_channels, config.embed_dim, rng=rng
        )
    return PatchTokenizer(config.patch_size, config.in_channels, config.embed_dim, rng=rng)

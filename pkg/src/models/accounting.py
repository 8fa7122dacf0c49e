"""Parameter and multiply-accumulate accounting.

MACs are counted analytically from the config for a given input size:

    convolution   k^2 * C_in * C_out * H_conv * W_conv
    linear        tokens * in * out
    attention     2 * n^2 * d per layer (Q K^T and weights x V)

``count_macs`` follows the comparison-table convention and leaves the
attention products out; ``mac_breakdown`` reports them separately.
Elementwise ops, softmax and normalization are never counted.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any

from ..core import ops
from .classifier import TransformerClassifier
from .registry import POOL_KERNEL, POOL_PADDING, POOL_STRIDE, CONV_CHANNELS, ModelConfig
from .tokenizer import patch_grid, sequence_length

logger = logging.getLogger(__name__)


@dataclass
class MacBreakdown:
    """Per-component multiply-accumulate counts for one forward pass of one image."""
    tokenizer: int = 0
    encoder_linear: int = 0
    attention: int = 0
    pooling: int = 0
    head: int = 0

    @property
    def total(self) -> int:
        """Comparison-table total (attention products excluded)."""
        return self.tokenizer + self.encoder_linear + self.pooling + self.head

    @property
    def total_with_attention(self) -> int:
        return self.total + self.attention

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["total"] = self.total
        data["total_with_attention"] = self.total_with_attention
        return data


def count_params(model: TransformerClassifier) -> int:
    """Exact number of learnable scalars (PE table, class token and head included)."""
    return model.num_parameters()


def _tokenizer_macs(config: ModelConfig, height: int, width: int) -> int:
    if config.uses_conv_tokenizer:
        k = config.kernel_size
        channels = [config.in_channels] + [CONV_CHANNELS] * (config.conv_blocks - 1) + [config.embed_dim]
        h, w, macs = height, width, 0
        for i in range(config.conv_blocks):
            ch = ops.output_extent(h, k, 1, k // 2)
            cw = ops.output_extent(w, k, 1, k // 2)
            macs += k * k * channels[i] * channels[i + 1] * ch * cw
            h = ops.output_extent(ch, POOL_KERNEL, POOL_STRIDE, POOL_PADDING)
            w = ops.output_extent(cw, POOL_KERNEL, POOL_STRIDE, POOL_PADDING)
        return macs
    gh, gw = patch_grid(height, width, config.patch_size)
    patch_dim = config.in_channels * config.patch_size ** 2
    return gh * gw * patch_dim * config.embed_dim


def mac_breakdown(model: TransformerClassifier | ModelConfig, image_size: tuple[int, int] | int | None = None) -> MacBreakdown:
    """Per-component MACs for one image.

    Args:
        model: Built model or its config
        image_size: (H, W) or side length; defaults to the size the model was built for
    """
    config = model.config if isinstance(model, TransformerClassifier) else model
    if image_size is None:
        image_size = config.image_size
    if isinstance(image_size, int):
        image_size = (image_size, image_size)
    height, width = image_size

    d = config.embed_dim
    hidden = config.mlp_ratio * d
    n = sequence_length(config, height, width) + (1 if config.uses_class_token else 0)

    per_layer_linear = n * d * 3 * d + n * d * d + 2 * n * d * hidden
    pooling = 2 * n * d if not config.uses_class_token else 0

    return MacBreakdown(
        tokenizer=_tokenizer_macs(config, height, width),
        encoder_linear=config.num_layers * per_layer_linear,
        attention=config.num_layers * 2 * n * n * d,
        pooling=pooling,
        head=d * config.num_classes,
    )


def count_macs(model: TransformerClassifier | ModelConfig, image_size: tuple[int, int] | int | None = None) -> int:
    """Multiply-accumulates for one image under the comparison-table convention.

    The total counts tokenizer convolutions and every linear projection
    (qkv, attention output, MLP, SeqPool, head). The attention score and
    value products (2 * n^2 * d per layer) are left out; ``mac_breakdown``
    reports them as ``attention`` and ``total_with_attention``.
    """
    return mac_breakdown(model, image_size).total

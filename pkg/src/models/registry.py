"""Model names, backbones and resolved architecture configs.

Names follow FAMILY-L/K[xB]: L encoder layers, K the patch size (patch
families) or convolution kernel (cct), B the number of convolutional
blocks (cct only, default 1). Both ``x`` and ``×`` separate K from B.

    cct-7/3x2      7 layers, two 3x3 convolutional blocks
    vit-lite-7/16  7 layers, 16x16 patches, class token
    cvt-7/4        7 layers, 4x4 patches, SeqPool
    vit-12/16      ViT-Base backbone, 16x16 patches
"""

import logging
import re
from dataclasses import asdict, dataclass, replace
from typing import Any

from ..core.errors import ConfigError
from ..core.types import Family, PEKind, Pooling

logger = logging.getLogger(__name__)

_NAME_RE = re.compile(r"^(vit-lite|vit|cvt|cct)-(\d+)/(\d+)(?:[x×](\d+))?$", re.IGNORECASE)

# layers -> (heads, mlp ratio, embedding dim)
BACKBONES: dict[int, tuple[int, int, int]] = {
    2: (2, 1, 128),
    4: (2, 1, 128),
    6: (4, 2, 256),
    7: (4, 2, 256),
    14: (6, 3, 384),
}

VIT_BACKBONES: dict[int, tuple[int, int, int]] = {
    12: (12, 4, 768),
    24: (16, 4, 1024),
    32: (16, 4, 1280),
}

# (mlp dropout, attention dropout, stochastic depth)
DEFAULT_RATES = (0.1, 0.0, 0.0)
TUNED_RATES = (0.0, 0.1, 0.1)

CONV_CHANNELS = 64
POOL_KERNEL = 3
POOL_STRIDE = 2
POOL_PADDING = 1

COMPARISON_MODELS = [
    "vit-12/16",
    "vit-lite-7/16",
    "vit-lite-7/8",
    "vit-lite-7/4",
    "vit-lite-6/4",
    "cvt-7/16",
    "cvt-7/8",
    "cvt-7/4",
    "cvt-7/2",
    "cct-2/3x2",
    "cct-7/7x1",
    "cct-7/3x2",
    "cct-7/3x1",
]


@dataclass(frozen=True)
class ModelConfig:
    """Fully resolved architecture description.

    Attributes:
        name: Canonical model name
        family: Model family
        num_layers: Encoder depth L
        num_heads: Attention heads per block
        mlp_ratio: MLP hidden size as a multiple of embed_dim
        embed_dim: Token embedding size d
        patch_size: Patch size P (patch families), else None
        kernel_size: Convolution kernel k (cct), else None
        conv_blocks: Number of convolutional blocks (0 for patch families)
        pe_kind: Positional embedding variant
        pooling: Sequence pooling before the classifier
        num_classes: Classifier outputs
        in_channels: Image channels
        image_size: (H, W) the model is built for
        mlp_dropout: Dropout after each MLP linear
        attn_dropout: Dropout on attention weights
        stochastic_depth: Residual-branch drop rate
    """
    name: str
    family: Family
    num_layers: int
    num_heads: int
    mlp_ratio: int
    embed_dim: int
    patch_size: int | None
    kernel_size: int | None
    conv_blocks: int
    pe_kind: PEKind
    pooling: Pooling
    num_classes: int = 10
    in_channels: int = 3
    image_size: tuple[int, int] = (32, 32)
    mlp_dropout: float = DEFAULT_RATES[0]
    attn_dropout: float = DEFAULT_RATES[1]
    stochastic_depth: float = DEFAULT_RATES[2]

    def __post_init__(self):
        if self.family == Family.CCT and self.kernel_size is None:
            raise ConfigError(f"{self.name}: cct models need a convolutional tokenizer")
        if self.family != Family.CCT and self.patch_size is None:
            raise ConfigError(f"{self.name}: {self.family.value} models need a patch tokenizer")
        if self.num_classes < 1:
            raise ConfigError(f"num_classes must be >= 1, got {self.num_classes}")
        if self.embed_dim % self.num_heads != 0:
            raise ConfigError(f"embedding dim {self.embed_dim} is not divisible by {self.num_heads} heads")

    @property
    def uses_conv_tokenizer(self) -> bool:
        return self.kernel_size is not None

    @property
    def uses_class_token(self) -> bool:
        return self.pooling == Pooling.CLASS_TOKEN

    def with_overrides(self, **changes: Any) -> "ModelConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["family"] = self.family.value
        data["pe_kind"] = self.pe_kind.value
        data["pooling"] = self.pooling.value
        data["image_size"] = list(self.image_size)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ModelConfig":
        data = dict(data)
        data["family"] = Family(data["family"])
        data["pe_kind"] = PEKind(data["pe_kind"])
        data["pooling"] = Pooling(data["pooling"])
        data["image_size"] = tuple(data["image_size"])
        return cls(**data)


def parse_model_name(name: str) -> tuple[Family, int, int, int | None]:
    """Split a model name into (family, layers, kernel or patch, blocks).

    Raises:
        ConfigError: If the name does not match the grammar
    """
    match = _NAME_RE.match(name.strip())
    if match is None:
        raise ConfigError(
            f"cannot parse model name '{name}' (expected FAMILY-L/K[xB], "
            f"FAMILY one of vit, vit-lite, cvt, cct)"
        )
    family = Family(match.group(1).lower())
    blocks = int(match.group(4)) if match.group(4) is not None else None
    return family, int(match.group(2)), int(match.group(3)), blocks


def canonical_name(family: Family, layers: int, size: int, blocks: int | None) -> str:
    name = f"{family.value}-{layers}/{size}"
    if family == Family.CCT:
        name += f"x{blocks or 1}"
    return name


def default_pooling(family: Family) -> Pooling:
    if family in (Family.CVT, Family.CCT):
        return Pooling.SEQPOOL
    return Pooling.CLASS_TOKEN


def resolve_config(
    name: str,
    num_classes: int = 10,
    image_size: tuple[int, int] | int = (32, 32),
    in_channels: int = 3,
    pe_kind: PEKind | str | None = None,
    pooling: Pooling | str | None = None,
    tuned: bool = False
) -> ModelConfig:
    """Resolve a model name and options into a ModelConfig.

    Args:
        name: Model name, e.g. "cct-7/3x2"
        num_classes: Classifier outputs
        image_size: (H, W) or a single side length
        in_channels: Image channels
        pe_kind: Positional embedding override (default learnable)
        pooling: Pooling override (default per family)
        tuned: Use the tuned dropout / stochastic-depth rates

    Returns:
        Resolved ModelConfig

    Raises:
        ConfigError: Unknown family or backbone, or invalid options
    """
    family, layers, size, blocks = parse_model_name(name)
    if blocks is not None and family != Family.CCT:
        raise ConfigError(f"'{name}': only cct models take a block count")

    table = VIT_BACKBONES if family == Family.VIT else BACKBONES
    if layers not in table:
        known = ", ".join(str(k) for k in sorted(table))
        raise ConfigError(f"'{name}': no {family.value} backbone with {layers} layers (known: {known})")
    heads, ratio, dim = table[layers]

    if size < 1:
        raise ConfigError(f"'{name}': kernel/patch size must be >= 1")
    if family == Family.CCT and blocks is not None and blocks < 1:
        raise ConfigError(f"'{name}': block count must be >= 1")

    if isinstance(image_size, int):
        image_size = (image_size, image_size)

    try:
        pe = PEKind(pe_kind) if pe_kind is not None else PEKind.LEARNABLE
        pool = Pooling(pooling) if pooling is not None else default_pooling(family)
    except ValueError as e:
        raise ConfigError(str(e)) from e

    mlp_drop, attn_drop, sd = TUNED_RATES if tuned else DEFAULT_RATES
    is_conv = family == Family.CCT

    config = ModelConfig(
        name=canonical_name(family, layers, size, blocks),
        family=family,
        num_layers=layers,
        num_heads=heads,
        mlp_ratio=ratio,
        embed_dim=dim,
        patch_size=None if is_conv else size,
        kernel_size=size if is_conv else None,
        conv_blocks=(blocks or 1) if is_conv else 0,
        pe_kind=pe,
        pooling=pool,
        num_classes=num_classes,
        in_channels=in_channels,
        image_size=tuple(image_size),
        mlp_dropout=mlp_drop,
        attn_dropout=attn_drop,
        stochastic_depth=sd,
    )
    logger.debug(f"Resolved {name} -> {config}")
    return config

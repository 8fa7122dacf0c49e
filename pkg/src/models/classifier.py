"""Transformer image classifiers (ViT, ViT-Lite, CVT, CCT).

forward(x) = head(pool(norm(blocks(embed_norm(pe(cls(tokenize(x))))))))

The pipeline is split into ``tokenize``, ``embed`` and ``forward_tokens``
so callers can inspect or permute the token sequence between stages.
"""

import logging

import numpy as np

from ..core.errors import ConfigError
from ..core.tensor import Tensor, get_tape, is_grad_enabled
from ..core.types import PEKind, Pooling
from ..nn.layers import EncoderBlock, LayerNorm, Linear
from ..nn.module import Module
from ..utils.rng import Domain, stream
from .embeddings import ClassToken, PositionalEmbedding
from .heads import ClassTokenPool, SeqPool
from .registry import ModelConfig, resolve_config
from .tokenizer import build_tokenizer, sequence_length

logger = logging.getLogger(__name__)


class TransformerClassifier(Module):
    """Tokenizer + positional embedding + encoder stack + pooling + linear head.

    Attributes:
        config: Resolved architecture description
        tokenizer: PatchTokenizer or ConvTokenizer
        class_token: ClassToken when pooling is class-token, else None
        pos_embed: PositionalEmbedding
        embed_norm: LayerNorm applied after the positional embedding
        blocks: Encoder blocks
        norm: Final LayerNorm
        pool: SeqPool or ClassTokenPool
        head: Linear classifier

    Example:
        model = build_model("cct-2/3x2", num_classes=10, image_size=(32, 32), seed=0)
        logits = model(Tensor(np.zeros((2, 3, 32, 32))))  # -> shape (2, 10)
    """

    def __init__(self, config: ModelConfig, rng: np.random.Generator | None = None):
        self.config = config
        d = config.embed_dim
        h, w = config.image_size
        n = sequence_length(config, h, w)

        self.tokenizer = build_tokenizer(config, rng=rng)
        self.class_token = ClassToken(d, rng=rng) if config.uses_class_token else None
        max_length = n + (1 if self.class_token is not None else 0)
        self.pos_embed = PositionalEmbedding(config.pe_kind, max_length, d, rng=rng)
        self.embed_norm = LayerNorm(d)
        self.blocks = [
            EncoderBlock(
                d,
                config.num_heads,
                config.mlp_ratio,
                mlp_dropout=config.mlp_dropout,
                attn_dropout=config.attn_dropout,
                drop_path=config.stochastic_depth,
                rng=rng,
            )
            for _ in range(config.num_layers)
        ]
        self.norm = LayerNorm(d)
        self.pool = SeqPool(d, rng=rng) if config.pooling == Pooling.SEQPOOL else ClassTokenPool()
        self.head = Linear(d, config.num_classes, rng=rng)

    def tokenize(self, x: Tensor) -> Tensor:
        """Image [b, C, H, W] -> tokens [b, n, d]."""
        if x.ndim != 4 or x.shape[1] != self.config.in_channels:
            raise ConfigError(
                f"{self.config.name} expects [b, {self.config.in_channels}, H, W] input, got {x.shape}"
            )
        return self.tokenizer(x)

    def embed(self, tokens: Tensor, add_positional: bool = True) -> Tensor:
        """Prepend the class token, add the positional embedding, normalize."""
        if self.class_token is not None:
            tokens = self.class_token(tokens)
        if add_positional:
            tokens = self.pos_embed(tokens)
        return self.embed_norm(tokens)

    def forward_tokens(self, x: Tensor, train: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        """Embedded sequence [b, n, d] -> logits [b, num_classes]."""
        for block in self.blocks:
            x = block(x, train, rng)
        return self.head(self.pool(self.norm(x)))

    def forward(self, x: Tensor, train: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        """Images [b, C, H, W] -> logits [b, num_classes].

        With gradients enabled each call starts a fresh graph: nodes left on
        the thread's tape by an earlier forward that was never followed by
        backward() are discarded. Run inference under ``no_grad``.
        """
        if is_grad_enabled():
            tape = get_tape()
            if len(tape):
                logger.debug(f"discarding {len(tape)} stale tape nodes")
                tape.clear()
        return self.forward_tokens(self.embed(self.tokenize(x)), train, rng)


def build_model(
    name: str,
    num_classes: int = 10,
    image_size: tuple[int, int] | int = (32, 32),
    in_channels: int = 3,
    pe_kind: PEKind | str | None = None,
    pooling: Pooling | str | None = None,
    tuned: bool = False,
    seed: int = 0,
    initialize: bool = True
) -> TransformerClassifier:
    """Parse a model name and build an initialized classifier.

    Args:
        name: Model name, e.g. "cct-7/3x2"
        num_classes: Classifier outputs
        image_size: (H, W) or side length the model is built for
        in_channels: Image channels (1 for MNIST-style data)
        pe_kind: Positional embedding override
        pooling: Pooling override
        tuned: Use the tuned dropout / stochastic-depth rates
        seed: Initialization seed
        initialize: Draw random weights; False leaves weights at zero
            (size accounting only)

    Returns:
        TransformerClassifier with ``config`` attached

    Raises:
        ConfigError: Unparseable name, unknown backbone or incompatible geometry
    """
    config = resolve_config(
        name,
        num_classes=num_classes,
        image_size=image_size,
        in_channels=in_channels,
        pe_kind=pe_kind,
        pooling=pooling,
        tuned=tuned,
    )
    return build_from_config(config, seed=seed, initialize=initialize)


def build_from_config(config: ModelConfig, seed: int = 0, initialize: bool = True) -> TransformerClassifier:
    rng = stream(seed, Domain.INIT) if initialize else None
    model = TransformerClassifier(config, rng=rng)
    logger.info(f"Built {config.name}: {model.num_parameters():,} parameters")
    return model

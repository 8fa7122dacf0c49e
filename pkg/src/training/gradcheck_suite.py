"""Finite-difference checks of every differentiable kernel and layer.

Each case builds a scalar function of one 64-bit tensor from a seeded
generator. Multi-element outputs are reduced with a fixed random
projection sum(W * y) rather than a plain sum, since a plain sum hides
errors that cancel (softmax rows, for example, always sum to one).
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Callable

import numpy as np
import pandas as pd

from ..core import ops
from ..core.errors import EngineError
from ..core.gradcheck import grad_check
from ..core.tensor import Tensor, get_tape, precision
from ..core.types import PEKind
from ..models.classifier import build_model
from ..models.embeddings import ClassToken, PositionalEmbedding
from ..models.heads import SeqPool
from ..models.tokenizer import ConvTokenizer, PatchTokenizer
from ..nn.layers import (
    Dropout,
    EncoderBlock,
    LayerNorm,
    Linear,
    Mlp,
    MultiHeadSelfAttention,
    StochasticDepth,
)
from ..optim.loss import smoothed_cross_entropy

logger = logging.getLogger(__name__)

KERNEL_TOLERANCE = 1e-5
END_TO_END_TOLERANCE = 1e-4

ScalarFn = Callable[[Tensor], Tensor]
CaseBuilder = Callable[[np.random.Generator], tuple[ScalarFn, Tensor]]


@dataclass(frozen=True)
class GradCheckCase:
    """A named function/input pair and its pass threshold."""
    name: str
    build: CaseBuilder
    tolerance: float = KERNEL_TOLERANCE
    max_coords: int | None = None


@dataclass
class GradCheckOutcome:
    name: str
    error: float
    tolerance: float
    passed: bool
    message: str = ""

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class _Projection:
    """sum(W * y) with one fixed W per output shape."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self._weights: dict[tuple[int, ...], Tensor] = {}

    def __call__(self, y: Tensor) -> Tensor:
        if y.shape not in self._weights:
            self._weights[y.shape] = Tensor(self.rng.standard_normal(y.shape))
        return ops.sum(y * self._weights[y.shape])


def _normal(rng: np.random.Generator, *shape: int) -> Tensor:
    return Tensor(rng.standard_normal(shape))


def _away_from_zero(rng: np.random.Generator, *shape: int) -> Tensor:
    magnitude = rng.uniform(0.1, 1.0, size=shape)
    return Tensor(np.where(rng.random(shape) < 0.5, -magnitude, magnitude))


def _distinct(rng: np.random.Generator, *shape: int) -> Tensor:
    """Values at least 0.1 apart, so no max-pool window has a near tie."""
    return Tensor(rng.permutation(int(np.prod(shape))).reshape(shape) * 0.1)


def _unary(fn: Callable[[Tensor], Tensor], make: Callable[..., Tensor] = _normal, shape=(3, 4)) -> CaseBuilder:
    def build(rng):
        project = _Projection(rng)
        return (lambda x: project(fn(x))), make(rng, *shape)
    return build


def _binary(fn: Callable[[Tensor, Tensor], Tensor], x_shape, other_shape, other_first=False, positive_other=False) -> CaseBuilder:
    def build(rng):
        project = _Projection(rng)
        other = rng.standard_normal(other_shape)
        if positive_other:
            other = np.abs(other) + 0.5
        other = Tensor(other)
        if other_first:
            return (lambda x: project(fn(other, x))), _normal(rng, *x_shape)
        return (lambda x: project(fn(x, other))), _normal(rng, *x_shape)
    return build


def _positive_unary(fn: Callable[[Tensor], Tensor]) -> CaseBuilder:
    def build(rng):
        project = _Projection(rng)
        return (lambda x: project(fn(x))), Tensor(rng.uniform(0.5, 2.0, size=(3, 4)))
    return build


def _module(make_module, make_input, call=None) -> CaseBuilder:
    def build(rng):
        module = make_module(rng)
        project = _Projection(rng)
        forward = call or (lambda m, x: m(x))
        return (lambda x: project(forward(module, x))), make_input(rng)
    return build


def _module_parameter(make_module, make_input, parameter: str) -> CaseBuilder:
    """Check the gradient of a module parameter instead of its input."""
    def build(rng):
        module = make_module(rng)
        x = make_input(rng)
        project = _Projection(rng)
        params = dict(module.named_parameters())
        return (lambda _: project(module(x))), params[parameter]
    return build


def _conv_weight(rng):
    project = _Projection(rng)
    x = _normal(rng, 2, 3, 6, 6)
    return (lambda w: project(ops.conv2d(x, w, stride=2, padding=1))), _normal(rng, 4, 3, 3, 3)


def _loss_case(rng):
    labels = rng.integers(0, 5, size=4)
    return (lambda x: smoothed_cross_entropy(x, labels, 0.1)), _normal(rng, 4, 5)


def _end_to_end(rng, wrt_head: bool = False):
    model = build_model("cct-2/3x2", num_classes=10, image_size=(32, 32), in_channels=3, seed=0)
    images = _normal(rng, 2, 3, 32, 32)
    labels = np.array([3, 7])
    if wrt_head:
        return (lambda _: smoothed_cross_entropy(model(images), labels, 0.1)), model.head.weight
    return (lambda x: smoothed_cross_entropy(model(x), labels, 0.1)), images


def default_cases() -> list[GradCheckCase]:
    """Kernels, layers, pooling, loss and a full CCT-2 forward pass."""
    def fresh(seed):
        return np.random.default_rng(seed)

    return [
        GradCheckCase("add", _binary(ops.add, (3, 4), (3, 4))),
        GradCheckCase("add.broadcast", _binary(ops.add, (4,), (3, 4), other_first=True)),
        GradCheckCase("sub", _binary(ops.sub, (1, 4), (3, 4), other_first=True)),
        GradCheckCase("mul", _binary(ops.mul, (3, 1), (3, 4))),
        GradCheckCase("div.numerator", _binary(ops.div, (3, 4), (3, 4), positive_other=True)),
        GradCheckCase("div.denominator", _positive_unary(lambda x: ops.div(Tensor(np.ones((3, 4))), x))),
        GradCheckCase("neg", _unary(ops.neg)),
        GradCheckCase("exp", _unary(ops.exp)),
        GradCheckCase("log", _positive_unary(ops.log)),
        GradCheckCase("reshape", _unary(lambda x: ops.reshape(x, (2, 6)))),
        GradCheckCase("transpose", _unary(lambda x: ops.transpose(x, (2, 0, 1)), shape=(2, 3, 4))),
        GradCheckCase("select", _unary(lambda x: x[:, 1:3], shape=(3, 4))),
        GradCheckCase("concat", _binary(lambda x, c: ops.concat([c, x, x], axis=1), (2, 3), (2, 2))),
        GradCheckCase("broadcast_to", _unary(lambda x: ops.broadcast_to(x, (2, 3, 4)), shape=(1, 3, 1))),
        GradCheckCase("sum", _unary(lambda x: ops.sum(x, axis=1, keepdims=True), shape=(2, 3, 4))),
        GradCheckCase("mean", _unary(lambda x: ops.mean(x, axis=0), shape=(2, 3, 4))),
        GradCheckCase("matmul", _binary(ops.matmul, (2, 3, 4), (2, 4, 5))),
        GradCheckCase("matmul.right", _binary(ops.matmul, (4, 5), (2, 3, 4), other_first=True)),
        GradCheckCase("relu", _unary(ops.relu, make=_away_from_zero)),
        GradCheckCase("gelu", _unary(ops.gelu)),
        GradCheckCase("softmax", _unary(lambda x: ops.softmax(x, axis=-1), shape=(2, 3, 5))),
        GradCheckCase("log_softmax", _unary(lambda x: ops.log_softmax(x, axis=-1), shape=(3, 5))),
        GradCheckCase("layernorm", _module(lambda rng: LayerNorm(6), lambda rng: _normal(rng, 2, 3, 6))),
        GradCheckCase("layernorm.gamma", _module_parameter(lambda rng: LayerNorm(6), lambda rng: _normal(rng, 2, 3, 6), "gamma")),
        GradCheckCase("conv2d", _binary(lambda x, w: ops.conv2d(x, w, stride=1, padding=1), (2, 3, 5, 5), (4, 3, 3, 3))),
        GradCheckCase("conv2d.weight", _conv_weight),
        GradCheckCase("maxpool2d", _unary(lambda x: ops.maxpool2d(x, 3, 2, 1), make=_distinct, shape=(2, 2, 6, 6))),
        GradCheckCase("linear", _module(lambda rng: Linear(5, 4, rng=rng), lambda rng: _normal(rng, 2, 3, 5))),
        GradCheckCase("linear.weight", _module_parameter(lambda rng: Linear(5, 4, rng=rng), lambda rng: _normal(rng, 3, 5), "weight")),
        GradCheckCase("dropout", _module(
            lambda rng: Dropout(0.3), lambda rng: _normal(rng, 4, 6),
            call=lambda m, x: m(x, train=True, rng=fresh(7)),
        )),
        GradCheckCase("stochastic_depth", _module(
            lambda rng: StochasticDepth(0.5), lambda rng: _normal(rng, 4, 3, 2),
            call=lambda m, x: m(x, train=True, rng=fresh(11)),
        )),
        GradCheckCase("attention", _module(
            lambda rng: MultiHeadSelfAttention(8, 2, rng=rng), lambda rng: _normal(rng, 2, 5, 8)
        )),
        GradCheckCase("mlp", _module(lambda rng: Mlp(6, 12, rng=rng), lambda rng: _normal(rng, 2, 3, 6))),
        GradCheckCase("encoder_block", _module(
            lambda rng: EncoderBlock(8, 2, 2, rng=rng), lambda rng: _normal(rng, 2, 4, 8)
        )),
        GradCheckCase("patch_tokenizer", _module(
            lambda rng: PatchTokenizer(2, 3, 6, rng=rng), lambda rng: _normal(rng, 2, 3, 4, 4)
        )),
        GradCheckCase("conv_tokenizer", _module(
            lambda rng: ConvTokenizer(3, 2, 2, 6, rng=rng), lambda rng: _normal(rng, 1, 2, 8, 8)
        )),
        GradCheckCase("class_token", _module(lambda rng: ClassToken(6, rng=rng), lambda rng: _normal(rng, 2, 3, 6))),
        GradCheckCase("positional_embedding", _module_parameter(
            lambda rng: PositionalEmbedding(PEKind.LEARNABLE, 5, 6, rng=rng), lambda rng: _normal(rng, 2, 4, 6), "table"
        )),
        GradCheckCase("seqpool", _module(lambda rng: SeqPool(6, rng=rng), lambda rng: _normal(rng, 2, 5, 6))),
        GradCheckCase("smoothed_cross_entropy", _loss_case),
        GradCheckCase("cct-2/3x2", _end_to_end, tolerance=END_TO_END_TOLERANCE, max_coords=24),
        GradCheckCase(
            "cct-2/3x2.head",
            lambda rng: _end_to_end(rng, wrt_head=True),
            tolerance=END_TO_END_TOLERANCE,
            max_coords=24,
        ),
    ]


def run_case(case: GradCheckCase, seed: int = 0, index: int = 0) -> GradCheckOutcome:
    """Run one case at 64-bit precision; construction errors count as failures."""
    rng = np.random.default_rng([seed, index])
    try:
        with precision(np.float64):
            f, x = case.build(rng)
            error = grad_check(f, x, max_coords=case.max_coords, rng=rng)
    except (EngineError, FloatingPointError) as e:
        get_tape().clear()
        logger.error(f"gradcheck {case.name}: {e}")
        return GradCheckOutcome(case.name, float("inf"), case.tolerance, False, str(e))
    passed = bool(np.isfinite(error) and error < case.tolerance)
    if not passed:
        logger.warning(f"gradcheck {case.name}: error {error:.3e} exceeds {case.tolerance:.0e}")
    return GradCheckOutcome(case.name, error, case.tolerance, passed)


def run_suite(cases: list[GradCheckCase] | None = None, seed: int = 0) -> list[GradCheckOutcome]:
    cases = default_cases() if cases is None else cases
    outcomes = [run_case(case, seed, i) for i, case in enumerate(cases)]
    failed = sum(not o.passed for o in outcomes)
    logger.info(f"gradcheck: {len(outcomes) - failed}/{len(outcomes)} cases passed")
    return outcomes


def format_table(outcomes: list[GradCheckOutcome]) -> str:
    """Pass/fail table, one row per case."""
    frame = pd.DataFrame(
        {
            "case": [o.name for o in outcomes],
            "max_rel_error": [f"{o.error:.3e}" for o in outcomes],
            "tolerance": [f"{o.tolerance:.0e}" for o in outcomes],
            "status": ["PASS" if o.passed else "FAIL" for o in outcomes],
        }
    )
    return frame.to_string(index=False)

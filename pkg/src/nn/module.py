"""Module and Parameter base types.

A Module owns Parameters and child Modules as plain attributes. Parameter
names are dotted attribute paths (``blocks.0.attn.qkv.weight``) in
attribute-assignment order, which makes state dictionaries and checkpoint
tensor tables deterministic.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Iterator

import numpy as np

from ..core.errors import ConfigError
from ..core.tensor import Tensor

logger = logging.getLogger(__name__)


class Parameter(Tensor):
    """Trainable tensor.

    Attributes:
        decay: Whether the optimizer applies weight decay to this tensor
    """

    __slots__ = ("decay",)

    def __init__(self, data: Any, decay: bool = True):
        super().__init__(data, requires_grad=True)
        self.decay = decay

    def __repr__(self) -> str:
        return f"Parameter(shape={self.shape}, dtype={self.dtype.name}, decay={self.decay})"


class Module(ABC):
    """Base class for all layers and models.

    Subclasses assign Parameters, Modules, or lists of Modules as attributes
    and implement forward().

    Example:
        class Scale(Module):
            def __init__(self):
                self.factor = Parameter(np.ones(1))

            def forward(self, x):
                return x * self.factor
    """

    @abstractmethod
    def forward(self, *args, **kwargs) -> Tensor:
        pass

    def __call__(self, *args, **kwargs) -> Tensor:
        return self.forward(*args, **kwargs)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        """Yield (dotted name, parameter) pairs in definition order."""
        for attr, value in vars(self).items():
            name = f"{prefix}{attr}"
            if isinstance(value, Parameter):
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{name}.")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{i}.")

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def state_dict(self) -> dict[str, np.ndarray]:
        """Copy of every parameter buffer keyed by dotted name."""
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """Load parameter buffers, casting to each parameter's dtype.

        Raises:
            ConfigError: If a parameter is missing or its shape differs
        """
        own = dict(self.named_parameters())
        missing = [name for name in own if name not in state]
        if missing:
            raise ConfigError(f"state is missing parameters: {', '.join(missing[:5])}")
        for name, p in own.items():
            value = np.asarray(state[name])
            if value.shape != p.shape:
                raise ConfigError(
                    f"parameter {name} has shape {p.shape}, state holds {value.shape}"
                )
            p.data = np.ascontiguousarray(value, dtype=p.dtype)
            p.grad = None
        unused = len(set(state) - set(own))
        if unused:
            logger.debug(f"load_state_dict ignored {unused} unrelated entries")

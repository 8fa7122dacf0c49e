"""Dense tensor type and reverse-mode autodiff tape.

A Tensor wraps a contiguous numpy buffer. Differentiable operations in
``ops`` record a TapeNode on the calling thread's Tape whenever gradient
recording is enabled and at least one input requires a gradient. Calling
``backward(loss)`` walks the tape in reverse, accumulating gradients into
every reachable tensor that requires one, and then clears the tape.

Example:
    x = Tensor([1.0, 2.0, 3.0], requires_grad=True)
    loss = (x * x).sum()
    loss.backward()
    x.grad  # -> array([2., 4., 6.])
"""

import logging
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Callable, Iterator, Sequence

import numpy as np

from .errors import ContractError

logger = logging.getLogger(__name__)

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_state = threading.local()


def default_dtype() -> type:
    return getattr(_state, "dtype", np.float32)


def _grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


def is_grad_enabled() -> bool:
    """Whether operations on the current thread are recorded on the tape."""
    return _grad_enabled()


@contextmanager
def precision(dtype: type) -> Iterator[None]:
    """Temporarily change the scalar type used for new float tensors.

    Args:
        dtype: numpy float type (np.float32 for training, np.float64 for checks)
    """
    previous = default_dtype()
    _state.dtype = np.dtype(dtype).type
    try:
        yield
    finally:
        _state.dtype = previous


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable tape recording on the current thread."""
    previous = _grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


class Tensor:
    """Dense N-dimensional array with optional gradient tracking.

    Attributes:
        data: Contiguous row-major numpy buffer
        requires_grad: Whether backward() should populate ``grad``
        grad: Accumulated gradient (same shape as data) or None
    """

    __slots__ = ("data", "requires_grad", "grad", "__weakref__")

    def __init__(self, data: Any, requires_grad: bool = False, dtype: type | None = None):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            if isinstance(data, np.ndarray) and np.issubdtype(data.dtype, np.floating):
                dtype = data.dtype
            else:
                dtype = default_dtype()
        self.data = np.ascontiguousarray(data, dtype=dtype)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype.name}{flag})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        """Return a copy of the underlying buffer."""
        return self.data.copy()

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single element, tensor has shape {self.shape}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    # Operator overloads delegate to the kernels in ops.
    def __add__(self, other): return ops.add(self, other)
    def __radd__(self, other): return ops.add(other, self)
    def __sub__(self, other): return ops.sub(self, other)
    def __rsub__(self, other): return ops.sub(other, self)
    def __mul__(self, other): return ops.mul(self, other)
    def __rmul__(self, other): return ops.mul(other, self)
    def __truediv__(self, other): return ops.div(self, other)
    def __rtruediv__(self, other): return ops.div(other, self)
    def __neg__(self): return ops.neg(self)
    def __matmul__(self, other): return ops.matmul(self, other)
    def __getitem__(self, index): return ops.select(self, index)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        return ops.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return ops.transpose(self, axes or None)


@dataclass
class TapeNode:
    """One recorded operation.

    Attributes:
        op: Kernel name (for diagnostics)
        inputs: Input tensors, in argument order
        output: Produced tensor
        backward: Maps the output gradient to one gradient (or None) per input
    """
    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Tape:
    """Ordered record of differentiable operations on one thread.

    Nodes are appended as operations execute, so the list is already in
    topological order. The tape is confined to the thread that owns it.
    """

    def __init__(self):
        self.nodes: list[TapeNode] = []
        self._outputs: set[int] = set()

    def __len__(self) -> int:
        return len(self.nodes)

    def record(self, op: str, inputs: tuple[Tensor, ...], output: Tensor, fn: BackwardFn) -> None:
        self.nodes.append(TapeNode(op, inputs, output, fn))
        self._outputs.add(id(output))

    def produced(self, tensor: Tensor) -> bool:
        return id(tensor) in self._outputs

    def clear(self) -> None:
        self.nodes.clear()
        self._outputs.clear()

    def backward(self, loss: Tensor) -> None:
        """Propagate d(loss)/d(x) to every reachable tensor requiring a gradient.

        Args:
            loss: Scalar tensor produced on this tape

        Raises:
            ContractError: If loss is not a scalar or was not produced on this tape
        """
        if loss.size != 1:
            raise ContractError(f"backward() needs a scalar loss, got shape {loss.shape}")
        if not self.produced(loss):
            raise ContractError("backward() loss was not produced on the current tape")

        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        reached: dict[int, Tensor] = {id(loss): loss}

        for node in reversed(self.nodes):
            out_grad = grads.pop(id(node.output), None)
            if out_grad is None:
                continue
            self._deposit(node.output, out_grad)
            input_grads = node.backward(out_grad)
            for tensor, grad in zip(node.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad
                    reached[key] = tensor

        # Leaves: tensors never produced by a node
        for key, grad in grads.items():
            self._deposit(reached[key], grad)

        logger.debug(f"backward over {len(self.nodes)} nodes")
        self.clear()

    @staticmethod
    def _deposit(tensor: Tensor, grad: np.ndarray) -> None:
        if grad.shape != tensor.shape:
            grad = np.broadcast_to(grad, tensor.shape)
        grad = np.asarray(grad, dtype=tensor.dtype)
        tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad


def get_tape() -> Tape:
    """Return the tape owned by the calling thread."""
    tape = getattr(_state, "tape", None)
    if tape is None:
        tape = Tape()
        _state.tape = tape
    return tape


def record(op: str, inputs: tuple[Tensor, ...], output: Tensor, fn: BackwardFn) -> Tensor:
    """Attach ``output`` to the tape if any input needs a gradient."""
    if _grad_enabled() and any(t.requires_grad for t in inputs):
        output.requires_grad = True
        get_tape().record(op, inputs, output, fn)
    return output


def backward(loss: Tensor) -> None:
    """Run reverse-mode differentiation from a scalar loss on the current tape."""
    get_tape().backward(loss)


from . import ops  # noqa: E402  (ops imports Tensor from this module)

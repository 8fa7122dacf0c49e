"""Finite-difference gradient checker.

Compares the tape's analytic gradient against central differences
(f(x + h) - f(x - h)) / 2h, coordinate by coordinate. The input buffer is
perturbed in place and restored after each perturbation, so ``f`` must read
``x.data`` at call time (every kernel in ``ops`` does).
"""

import logging
from typing import Callable

import numpy as np

from .errors import ContractError
from .tensor import Tensor, get_tape, no_grad

logger = logging.getLogger(__name__)


def _scalar(value: Tensor) -> Tensor:
    if not isinstance(value, Tensor) or value.size != 1:
        shape = value.shape if isinstance(value, Tensor) else type(value).__name__
        raise ContractError(f"grad_check needs a scalar-valued function, got {shape}")
    return value


def analytic_gradient(f: Callable[[Tensor], Tensor], x: Tensor) -> np.ndarray:
    """Gradient of f at x computed by the tape."""
    x.requires_grad = True
    x.grad = None
    tape = get_tape()
    tape.clear()
    y = _scalar(f(x))
    if not tape.produced(y):
        # f does not depend on x through any recorded op
        tape.clear()
        return np.zeros_like(x.data)
    tape.backward(y)
    return x.grad.copy() if x.grad is not None else np.zeros_like(x.data)


def grad_check(
    f: Callable[[Tensor], Tensor],
    x: Tensor,
    h: float = 1e-5,
    max_coords: int | None = None,
    rng: np.random.Generator | None = None
) -> float:
    """Maximum relative error between analytic and numeric gradients.

    The error at one coordinate is |analytic - numeric| / max(1, |numeric|).

    Args:
        f: Function mapping x to a scalar tensor
        x: 64-bit input tensor
        h: Central-difference step
        max_coords: Perturb at most this many randomly chosen coordinates
        rng: Generator used to choose coordinates (seed 0 when omitted)

    Returns:
        Largest per-coordinate relative error

    Raises:
        ContractError: If x is not 64-bit or f is not scalar-valued
    """
    if x.dtype != np.float64:
        raise ContractError(f"grad_check needs a 64-bit input, got {x.dtype.name}")

    analytic = analytic_gradient(f, x)

    coords = np.arange(x.size)
    if max_coords is not None and x.size > max_coords:
        rng = rng if rng is not None else np.random.default_rng(0)
        coords = np.sort(rng.choice(x.size, size=max_coords, replace=False))

    flat = x.data.reshape(-1)
    worst = 0.0
    with no_grad():
        for i in coords:
            original = flat[i]
            flat[i] = original + h
            f_plus = _scalar(f(x)).item()
            flat[i] = original - h
            f_minus = _scalar(f(x)).item()
            flat[i] = original
            numeric = (f_plus - f_minus) / (2.0 * h)
            error = abs(analytic.reshape(-1)[i] - numeric) / max(1.0, abs(numeric))
            worst = max(worst, error)

    logger.debug(f"grad_check over {len(coords)} coordinates: max error {worst:.3e}")
    return float(worst)

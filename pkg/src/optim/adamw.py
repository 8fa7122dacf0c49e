"""AdamW with decoupled weight decay."""

import logging
from typing import Iterable

import numpy as np

from ..core.errors import CheckpointError, ContractError, DimensionError
from ..nn.module import Parameter

logger = logging.getLogger(__name__)


class AdamW:
    """Adam with decoupled weight decay.

    Per parameter p with gradient g at step t:

        m <- b1 m + (1 - b1) g
        v <- b2 v + (1 - b2) g^2
        p <- p (1 - lr wd) - lr m_hat / (sqrt(v_hat) + eps)

    Weight decay applies only to parameters with ``decay=True``.

    Example:
        optimizer = AdamW(model.named_parameters(), lr=5e-4, weight_decay=3e-2)
        loss.backward()
        optimizer.step(lr=schedule.lr_at(step + 1))
    """

    def __init__(
        self,
        params: Iterable[tuple[str, Parameter]],
        lr: float = 5e-4,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 3e-2
    ):
        self.params: dict[str, Parameter] = dict(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {name: np.zeros_like(p.data) for name, p in self.params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in self.params.items()}

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def step(self, lr: float | None = None) -> None:
        """Apply one update using the gradients currently held by the parameters.

        Args:
            lr: Learning rate for this step (defaults to the constructor value)

        Raises:
            ContractError: If a parameter has no gradient
            DimensionError: If optimizer state and a parameter disagree in shape
        """
        lr = self.lr if lr is None else lr
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t

        for name, p in self.params.items():
            if p.grad is None:
                raise ContractError(f"parameter {name} has no gradient")
            m, v = self.m[name], self.v[name]
            if m.shape != p.shape or p.grad.shape != p.shape:
                raise DimensionError(f"optimizer state for {name} does not match", m.shape, p.shape)
            g = p.grad
            m = self.beta1 * m + (1.0 - self.beta1) * g
            v = self.beta2 * v + (1.0 - self.beta2) * (g * g)
            self.m[name], self.v[name] = m, v

            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            decayed = p.data * (1.0 - lr * self.weight_decay) if p.decay else p.data
            p.data = np.ascontiguousarray(decayed - lr * update, dtype=p.dtype)

    def state_dict(self) -> dict[str, np.ndarray]:
        """Moments and step counter as named arrays (checkpoint tensor table)."""
        state: dict[str, np.ndarray] = {}
        for name in self.params:
            state[f"optim.m.{name}"] = self.m[name].copy()
        for name in self.params:
            state[f"optim.v.{name}"] = self.v[name].copy()
        state["optim.step"] = np.array([self.t], dtype=np.int64)
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """Restore moments and step counter.

        Raises:
            CheckpointError: If an entry is missing or has the wrong shape
        """
        if "optim.step" not in state:
            raise CheckpointError("checkpoint has no optimizer step counter")
        for name, p in self.params.items():
            for key, table in ((f"optim.m.{name}", self.m), (f"optim.v.{name}", self.v)):
                if key not in state:
                    raise CheckpointError(f"checkpoint is missing {key}")
                value = np.asarray(state[key])
                if value.shape != p.shape:
                    raise CheckpointError(f"{key} has shape {value.shape}, parameter has {p.shape}")
                table[name] = value.astype(p.dtype, copy=True)
        self.t = int(np.asarray(state["optim.step"]).reshape(-1)[0])
        logger.debug(f"Restored optimizer state at step {self.t}")

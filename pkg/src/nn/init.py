"""Parameter initializers.

Weights are drawn from a normal distribution with std 0.02 truncated at
two standard deviations. Passing ``rng=None`` yields zeros instead, which
is what size accounting uses for large models.
"""

import numpy as np
from scipy import stats

from ..core.tensor import default_dtype

TRUNC_STD = 0.02


def trunc_normal(
    shape: tuple[int, ...],
    rng: np.random.Generator | None,
    std: float = TRUNC_STD
) -> np.ndarray:
    """Sample a truncated normal on [-2 std, 2 std]."""
    if rng is None:
        return zeros(shape)
    values = stats.truncnorm.rvs(-2.0, 2.0, loc=0.0, scale=std, size=shape, random_state=rng)
    return np.asarray(values, dtype=default_dtype()).reshape(shape)


def zeros(shape: tuple[int, ...]) -> np.ndarray:
    return np.zeros(shape, dtype=default_dtype())


def ones(shape: tuple[int, ...]) -> np.ndarray:
    return np.ones(shape, dtype=default_dtype())

"""Tests for the finite-difference gradient checker."""

import numpy as np
import pytest

from src.core import ops
from src.core.errors import ContractError
from src.core.gradcheck import analytic_gradient, grad_check
from src.core.tensor import Tensor, precision


class TestGradCheck:

    def test_sum_of_integers_is_exact(self):
        # integer inputs and a power-of-two step make both differences exact
        x = Tensor(np.arange(6, dtype=np.float64).reshape(2, 3))
        assert grad_check(lambda t: t.sum(), x, h=2.0 ** -10) == 0.0

    def test_smooth_function_passes(self, rng):
        x = Tensor(rng.normal(size=(3, 4)))
        assert grad_check(lambda t: (ops.exp(t) * t).sum(), x) < 1e-7

    def test_requires_float64(self):
        with pytest.raises(ContractError):
            grad_check(lambda t: t.sum(), Tensor(np.ones(3, dtype=np.float32)))

    def test_requires_scalar_output(self):
        with pytest.raises(ContractError):
            grad_check(lambda t: t * 2.0, Tensor(np.ones(3, dtype=np.float64)))

    def test_input_restored(self, rng):
        values = rng.normal(size=(2, 2))
        x = Tensor(values.copy())
        grad_check(lambda t: (t * t).sum(), x)
        np.testing.assert_array_equal(x.data, values)

    def test_detects_wrong_backward(self, monkeypatch, rng):
        monkeypatch.setattr(ops, "_gelu_backward", lambda x, g: g)
        x = Tensor(rng.normal(size=(4,)))
        assert grad_check(lambda t: ops.gelu(t).sum(), x) > 1e-3

    def test_max_coords_limits_evaluations(self, rng):
        calls = []

        def f(t):
            calls.append(1)
            return (t * t).sum()

        grad_check(f, Tensor(rng.normal(size=(10, 10))), max_coords=5)
        # one analytic pass plus two perturbed evaluations per coordinate
        assert len(calls) == 1 + 2 * 5

    def test_constant_function_has_zero_gradient(self):
        with precision(np.float64):
            g = analytic_gradient(lambda t: Tensor(3.0), Tensor(np.ones(3)))
        np.testing.assert_array_equal(g, np.zeros(3))

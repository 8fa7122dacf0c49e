"""Tests for the differentiable kernels."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from src.core import ops
from src.core.errors import DimensionError
from src.core.tensor import Tensor, precision


def naive_conv2d(x, w, stride, padding):
    b, c_in, h, wd = x.shape
    c_out, _, k, _ = w.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    oh = (h + 2 * padding - k) // stride + 1
    ow = (wd + 2 * padding - k) // stride + 1
    out = np.zeros((b, c_out, oh, ow))
    for i in range(oh):
        for j in range(ow):
            patch = xp[:, :, i * stride:i * stride + k, j * stride:j * stride + k]
            out[:, :, i, j] = np.einsum("bchw,ochw->bo", patch, w)
    return out


class TestElementwise:

    def test_shape_mismatch_names_shapes(self):
        with pytest.raises(DimensionError) as info:
            ops.add(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 3))))
        assert "(2, 3)" in str(info.value) and "(4, 3)" in str(info.value)

    def test_scalar_operands(self):
        x = Tensor([1.0, 2.0])
        np.testing.assert_allclose((2.0 * x + 1.0).data, [3.0, 5.0])
        np.testing.assert_allclose((1.0 / x).data, [1.0, 0.5])

    def test_mean_over_axis(self):
        x = Tensor(np.arange(6.0).reshape(2, 3))
        np.testing.assert_allclose(ops.mean(x, axis=0).data, [1.5, 2.5, 3.5])


class TestMatmul:

    def test_batched_product(self, rng):
        a, b = rng.normal(size=(2, 3, 4)), rng.normal(size=(2, 4, 5))
        with precision(np.float64):
            out = ops.matmul(Tensor(a), Tensor(b))
        np.testing.assert_allclose(out.data, a @ b)

    def test_inner_mismatch(self):
        with pytest.raises(DimensionError):
            ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 5))))

    def test_hand_expanded_product(self):
        out = ops.matmul(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([[5.0], [6.0]]))
        np.testing.assert_array_equal(out.data, [[17.0], [39.0]])

    def test_identity_left_operand(self, rng):
        m = rng.normal(size=(3, 3))
        with precision(np.float64):
            np.testing.assert_array_equal(ops.matmul(Tensor(np.eye(3)), Tensor(m)).data, m)

    def test_vector_operand_rejected(self):
        with pytest.raises(DimensionError):
            ops.matmul(Tensor(np.ones(3)), Tensor(np.ones((3, 2))))


class TestActivations:

    def test_relu(self):
        np.testing.assert_array_equal(ops.relu(Tensor([-1.0, 0.0, 2.0])).data, [0.0, 0.0, 2.0])

    def test_gelu_at_one(self):
        with precision(np.float64):
            assert ops.gelu(Tensor([1.0])).item() == pytest.approx(0.8413447, abs=1e-6)

    def test_softmax_known_values(self):
        with precision(np.float64):
            y = ops.softmax(Tensor([1.0, 2.0, 3.0]), axis=-1).data
        np.testing.assert_allclose(y, [0.09003057, 0.24472847, 0.66524096], atol=1e-6)
        np.testing.assert_allclose(ops.softmax(Tensor([0.0, 0.0]), axis=-1).data, [0.5, 0.5])

    def test_gelu_matches_erf_form(self):
        x = np.linspace(-4, 4, 17)
        with precision(np.float64):
            out = ops.gelu(Tensor(x)).data
        np.testing.assert_allclose(out, x * 0.5 * (1 + special.erf(x / np.sqrt(2))))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1), st.floats(min_value=-500, max_value=500))
    def test_softmax_rows_sum_to_one(self, seed, shift):
        x = np.random.default_rng(seed).normal(scale=10.0, size=(3, 7)) + shift
        with precision(np.float64):
            y = ops.softmax(Tensor(x), axis=-1).data
        assert np.all(np.isfinite(y))
        np.testing.assert_allclose(y.sum(axis=-1), 1.0, atol=1e-12)

    def test_log_softmax_is_log_of_softmax(self, rng):
        x = rng.normal(size=(4, 6))
        with precision(np.float64):
            np.testing.assert_allclose(
                ops.log_softmax(Tensor(x)).data, np.log(ops.softmax(Tensor(x)).data), atol=1e-12
            )

    def test_softmax_large_logits_stable(self):
        y = ops.softmax(Tensor([[1000.0, 0.0]])).data
        np.testing.assert_allclose(y, [[1.0, 0.0]])


class TestLayerNorm:

    def test_normalized_rows(self, rng):
        x = rng.normal(loc=3.0, scale=5.0, size=(4, 16))
        with precision(np.float64):
            y = ops.layernorm(Tensor(x), Tensor(np.ones(16)), Tensor(np.zeros(16))).data
        np.testing.assert_allclose(y.mean(axis=-1), 0.0, atol=1e-10)
        np.testing.assert_allclose(y.std(axis=-1), 1.0, atol=1e-3)

    def test_affine_shape_checked(self):
        with pytest.raises(DimensionError):
            ops.layernorm(Tensor(np.ones((2, 4))), Tensor(np.ones(3)), Tensor(np.zeros(3)))


class TestConv2d:

    @pytest.mark.parametrize("stride,padding", [(1, 0), (1, 1), (2, 1), (2, 0)])
    def test_matches_direct_loop(self, rng, stride, padding):
        x, w = rng.normal(size=(2, 3, 7, 7)), rng.normal(size=(4, 3, 3, 3))
        with precision(np.float64):
            out = ops.conv2d(Tensor(x), Tensor(w), stride=stride, padding=padding).data
        np.testing.assert_allclose(out, naive_conv2d(x, w, stride, padding), atol=1e-10)

    def test_same_padding_keeps_size(self):
        out = ops.conv2d(Tensor(np.ones((1, 1, 5, 5))), Tensor(np.ones((2, 1, 3, 3))), padding=1)
        assert out.shape == (1, 2, 5, 5)

    def test_all_ones_receptive_field_sums(self):
        out = ops.conv2d(Tensor(np.ones((1, 1, 4, 4))), Tensor(np.ones((1, 1, 3, 3))), stride=1, padding=1)
        expected = np.array([
            [4.0, 6.0, 6.0, 4.0],
            [6.0, 9.0, 9.0, 6.0],
            [6.0, 9.0, 9.0, 6.0],
            [4.0, 6.0, 6.0, 4.0],
        ])
        np.testing.assert_array_equal(out.data[0, 0], expected)

    def test_unit_kernel_is_identity(self, rng):
        x = rng.normal(size=(2, 1, 5, 6))
        with precision(np.float64):
            out = ops.conv2d(Tensor(x), Tensor(np.ones((1, 1, 1, 1))))
        np.testing.assert_array_equal(out.data, x)

    def test_bias(self):
        out = ops.conv2d(
            Tensor(np.zeros((1, 1, 3, 3))), Tensor(np.zeros((2, 1, 1, 1))), bias=Tensor([1.0, -1.0])
        )
        np.testing.assert_array_equal(out.data[0, :, 0, 0], [1.0, -1.0])

    def test_kernel_larger_than_input(self):
        with pytest.raises(DimensionError):
            ops.conv2d(Tensor(np.ones((1, 1, 2, 2))), Tensor(np.ones((1, 1, 5, 5))))

    def test_channel_mismatch(self):
        with pytest.raises(DimensionError):
            ops.conv2d(Tensor(np.ones((1, 2, 4, 4))), Tensor(np.ones((1, 3, 3, 3))))


class TestMaxPool:

    def test_output_extent(self):
        assert ops.output_extent(32, 3, 2, 1) == 16
        assert ops.output_extent(7, 3, 2, 1) == 4

    def test_values(self):
        x = np.arange(16.0).reshape(1, 1, 4, 4)
        out = ops.maxpool2d(Tensor(x), 2, 2).data
        np.testing.assert_array_equal(out[0, 0], [[5.0, 7.0], [13.0, 15.0]])

    def test_padding_never_selected(self):
        x = -np.ones((1, 1, 3, 3))
        out = ops.maxpool2d(Tensor(x), 3, 2, 1).data
        np.testing.assert_array_equal(out, -np.ones((1, 1, 2, 2)))

    def test_tie_routes_gradient_to_first_maximum(self):
        x = Tensor(np.ones((1, 1, 2, 2)), requires_grad=True)
        ops.maxpool2d(x, 2, 2).sum().backward()
        np.testing.assert_array_equal(x.grad[0, 0], [[1.0, 0.0], [0.0, 0.0]])

    def test_gradient_is_routed_to_argmax(self):
        x = Tensor(np.array([[[[1.0, 9.0], [3.0, 4.0]]]]), requires_grad=True)
        ops.maxpool2d(x, 2, 2).sum().backward()
        np.testing.assert_array_equal(x.grad[0, 0], [[0.0, 1.0], [0.0, 0.0]])


class TestWindowGeometry:

    @pytest.mark.parametrize("kernel", range(1, 8))
    @pytest.mark.parametrize("stride", range(1, 5))
    @pytest.mark.parametrize("padding", range(0, 4))
    def test_output_size_formula(self, kernel, stride, padding):
        h, w = 9, 10
        x = Tensor(np.ones((1, 2, h, w)))
        expected = ((h + 2 * padding - kernel) // stride + 1, (w + 2 * padding - kernel) // stride + 1)
        conv = ops.conv2d(x, Tensor(np.ones((3, 2, kernel, kernel))), stride=stride, padding=padding)
        pool = ops.maxpool2d(x, kernel, stride, padding)
        assert conv.shape == (1, 3) + expected
        assert pool.shape == (1, 2) + expected
        assert ops.output_extent(h, kernel, stride, padding) == expected[0]

# tools/tests/noisylab/autodiff/test_ops.py
# SPDX-License-Identifier: MIT
# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest

from noisylab.autodiff import Grad, Ops, Tape, Tensor
from noisylab.errors import TapeError, TensorError
from noisylab.losses import Losses


# -----------------------
# Helpers
# -----------------------

def t(values):
    return Tensor.constant(np.asarray(values, dtype=np.float64))


def gradient_of(f, point):
    with Tape():
        x = Tensor.parameter(np.asarray(point, dtype=np.float64))
        return Grad.backward(f(x))[x.node].data


# -----------------------
# Construction
# -----------------------

def test_tensor_of_is_row_major():
    x = Tensor.of([2, 2], [1, 2, 3, 4])
    assert x.shape == (2, 2)
    assert x.data.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_tensor_of_empty_shape_is_valid():
    assert Tensor.of([0], []).shape == (0,)


def test_tensor_of_length_mismatch():
    with pytest.raises(TensorError):
        Tensor.of([2], [1, 2, 3])


def test_tensor_of_rejects_non_finite():
    with pytest.raises(TensorError):
        Tensor.of([2], [1.0, float("nan")])


def test_parameter_outside_a_tape_is_untaped():
    assert not Tensor.parameter([1.0, 2.0]).taped


# -----------------------
# Affine / elementwise
# -----------------------

def test_affine_basis_vector():
    out = Ops.affine(t([[1, 0]]), t([[2, 0], [0, 3]]), t([0, 0]))
    assert out.data.tolist() == [[2.0, 0.0]]


def test_affine_identity():
    x = np.random.default_rng(0).normal(size=(5, 3))
    out = Ops.affine(t(x), t(np.eye(3)), t(np.zeros(3)))
    assert np.array_equal(out.data, x)


def test_affine_arithmetic():
    out = Ops.affine(t([[1, 1]]), t([[1, 1], [1, 1]]), t([1, 1]))
    assert out.data.tolist() == [[3.0, 3.0]]


def test_affine_inner_dimension_mismatch():
    with pytest.raises(TensorError):
        Ops.affine(t([[1, 1, 1]]), t([[1, 1], [1, 1]]), t([1, 1]))


def test_relu_and_square():
    assert Ops.relu(t([-1, 0, 2])).data.tolist() == [0.0, 0.0, 2.0]
    assert Ops.square(t([3, -2])).data.tolist() == [9.0, 4.0]


def test_sub_self_is_zero_with_zero_gradient():
    assert Ops.sub(t([1, 2]), t([1, 2])).data.tolist() == [0.0, 0.0]
    grad = gradient_of(lambda x: Ops.sum(Ops.sub(x, x)), [1.0, 2.0])
    assert grad.tolist() == [0.0, 0.0]


def test_binary_shape_mismatch():
    with pytest.raises(TensorError):
        Ops.add(t([1, 2]), t([1, 2, 3]))


def test_unknown_elementwise_kind():
    with pytest.raises(TensorError):
        Ops.elementwise("tanh", t([1.0]))


# -----------------------
# Convolution
# -----------------------

def test_conv_of_ones_sums_the_window():
    out = Ops.conv2d(t(np.ones((1, 1, 3, 3))), t(np.ones((1, 1, 3, 3))), t([0.0]))
    assert out.shape == (1, 1, 1, 1)
    assert out.item() == 9.0


def test_conv_unit_kernel_is_identity():
    x = np.random.default_rng(1).random((2, 1, 4, 5))
    out = Ops.conv2d(t(x), t(np.ones((1, 1, 1, 1))), t([0.0]))
    assert np.array_equal(out.data, x)


def test_conv_zero_kernel_gives_bias():
    out = Ops.conv2d(t(np.ones((1, 2, 4, 4))), t(np.zeros((3, 2, 2, 2))), t([0.5, -1.0, 2.0]))
    assert out.shape == (1, 3, 3, 3)
    assert np.all(out.data[0, 0] == 0.5) and np.all(out.data[0, 1] == -1.0) and np.all(out.data[0, 2] == 2.0)


def test_conv_kernel_larger_than_input():
    with pytest.raises(TensorError):
        Ops.conv2d(t(np.ones((1, 1, 2, 2))), t(np.ones((1, 1, 3, 3))), t([0.0]))


# -----------------------
# Reductions / softmax
# -----------------------

def test_mean_and_sum():
    assert Ops.mean(t([1, 2, 3])).item() == 2.0
    assert Ops.sum(t(np.zeros((0, 3))), axis=0).data.tolist() == [0.0, 0.0, 0.0]
    assert Ops.mean(t([[1, 3], [3, 5]]), axis=0).data.tolist() == [2.0, 4.0]


def test_reduce_bad_axis():
    with pytest.raises(TensorError):
        Ops.sum(t([[1, 2]]), axis=2)


def test_mean_of_empty_extent():
    with pytest.raises(TensorError):
        Ops.mean(t(np.zeros((0,))))


def test_log_softmax_uniform():
    out = Ops.log_softmax(t([[0, 0]])).data
    assert out == pytest.approx([[-math.log(2), -math.log(2)]], abs=1e-12)


def test_log_softmax_shift_invariant():
    for c in (-50.0, 0.0, 7.5, 300.0):
        out = Ops.log_softmax(t([[c, c, c]])).data
        assert out == pytest.approx([[-math.log(3)] * 3], abs=1e-12)


def test_log_softmax_does_not_overflow():
    out = Ops.log_softmax(t([[1000, 0]])).data
    assert np.all(np.isfinite(out))
    assert out[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert out[0, 1] == pytest.approx(-1000.0, abs=1e-9)


def test_gather_checks_columns():
    with pytest.raises(TensorError):
        Ops.gather(t([[1, 2]]), np.array([2]))


def test_take_out_of_range():
    with pytest.raises(TensorError):
        Ops.take(t([1, 2, 3]), np.array([3]))


# -----------------------
# Backward
# -----------------------

def test_backward_of_sum_of_squares():
    grad = gradient_of(lambda x: Ops.sum(Ops.square(x)), [1.0, 2.0])
    assert grad.tolist() == [2.0, 4.0]


def test_backward_of_constant_loss_is_zero():
    with Tape():
        x = Tensor.parameter(np.array([1.0, 2.0]))
        grads = Grad.backward(Tensor.constant(3.0))
    assert grads[x.node].data.tolist() == [0.0, 0.0]


def test_gradients_accumulate_over_reuse():
    grad = gradient_of(lambda x: Ops.sum(Ops.add(x, Ops.mul(x, x))), [1.0, -3.0])
    assert grad.tolist() == [3.0, -5.0]


def test_unreached_leaf_gets_zeros():
    with Tape():
        x = Tensor.parameter(np.array([1.0]))
        y = Tensor.parameter(np.array([[1.0, 2.0]]))
        grads = Grad.backward(Ops.sum(Ops.square(x)))
    assert grads[y.node].data.tolist() == [[0.0, 0.0]]


def test_backward_needs_a_tape():
    with pytest.raises(TapeError):
        Grad.backward(Tensor.constant(1.0))


def test_backward_needs_a_scalar():
    with Tape():
        x = Tensor.parameter(np.array([1.0, 2.0]))
        with pytest.raises(TapeError):
            Grad.backward(Ops.square(x))


def test_suspended_records_nothing():
    with Tape() as tape:
        x = Tensor.parameter(np.array([1.0, 2.0]))
        before = len(tape)
        with Tape.suspended():
            y = Ops.square(x)
        assert len(tape) == before
        assert not y.taped


def test_taped_and_inference_values_match():
    x = np.random.default_rng(2).normal(size=(4, 3))
    with Tape():
        taped = Ops.log_softmax(Tensor.parameter(x)).data
    assert np.array_equal(taped, Ops.log_softmax(t(x)).data)


# -----------------------
# Finite differences
# -----------------------

def test_check_linear_is_exact():
    point = Tensor.constant(np.random.default_rng(3).normal(size=(3, 4)))
    assert Grad.check(lambda x: Ops.sum(x), point) <= 1e-10


def test_check_relu_away_from_the_kink():
    values = np.array([-1.5, -0.3, 0.2, 0.9, 2.0])
    assert Grad.check(lambda x: Ops.sum(Ops.square(Ops.relu(x))), Tensor.constant(values)) <= 1e-6


def test_check_mean_point_ensemble_of_two_vectors():
    point = Tensor.constant(np.array([[0.7, 0.3], [0.2, 0.8]]))

    def f(x):
        return Losses.mean_point_ensemble(Ops.take(x, np.array([0])), Ops.take(x, np.array([1])))

    assert Grad.check(f, point) <= 1e-6

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import numpy as np
import pytest

from autoselect.exceptions import NumericFailure
from autoselect.numcore import ops
from autoselect.numcore.autodiff import fd_grad, grad, relative_error, value_and_grad
from autoselect.numcore.tape import Tape

SEEDS = range(100)


def _weighted(out, cotangent):
	return ops.reduce_sum(ops.mul(out, cotangent))


def _unary(fn):
	def build(rng):
		x = rng.uniform(-2, 2, size=(2, 3))
		cotangent = rng.uniform(-1, 1, size=(2, 3))
		return [x], lambda leaves: _weighted(fn(leaves[0]), cotangent)

	return build


def _binary(fn, shape_a=(2, 3), shape_b=(2, 3)):
	def build(rng):
		a = rng.uniform(-2, 2, size=shape_a)
		b = rng.uniform(-2, 2, size=shape_b)
		out_shape = np.broadcast_shapes(shape_a, shape_b) if fn is not ops.matmul else (shape_a[0], shape_b[1])
		cotangent = rng.uniform(-1, 1, size=out_shape)
		return [a, b], lambda leaves: _weighted(fn(leaves[0], leaves[1]), cotangent)

	return build


def _log(rng):
	x = rng.uniform(0.5, 2, size=(3,))
	cotangent = rng.uniform(-1, 1, size=(3,))
	return [x], lambda leaves: _weighted(ops.log(leaves[0]), cotangent)


def _affine(rng):
	x, w, b = rng.uniform(-2, 2, (2, 3)), rng.uniform(-2, 2, (3, 4)), rng.uniform(-2, 2, (4,))
	cotangent = rng.uniform(-1, 1, (2, 4))
	return [x, w, b], lambda leaves: _weighted(ops.affine(*leaves), cotangent)


def _reductions(rng):
	x = rng.uniform(-2, 2, (2, 3, 2))
	cotangent = rng.uniform(-1, 1, (2,))

	def f(leaves):
		summed = ops.reduce_sum(leaves[0], axis=(0, 1))
		averaged = ops.mean(leaves[0], axis=1)
		return _weighted(summed, cotangent) + ops.mean(ops.square(averaged))

	return [x], f


def _shape_ops(rng):
	x = rng.uniform(-2, 2, (2, 4))
	y = rng.uniform(-2, 2, (2, 4))
	cotangent = rng.uniform(-1, 1, (2, 2, 2))

	def f(leaves):
		left = ops.slice_last(leaves[0], 1, 3)
		right = ops.reshape(ops.slice_last(leaves[1], 0, 2), (2, 2))
		return _weighted(ops.stack([left, right], axis=1), cotangent)

	return [x, y], f


def _weighted_sum(rng):
	w, v = rng.uniform(-2, 2, (4,)), rng.uniform(-2, 2, (4,))
	return [w, v], lambda leaves: ops.weighted_sum(leaves[0], leaves[1])


def _lstm(rng):
	d, f_in = 3, 2
	x = rng.uniform(-2, 2, (2, f_in))
	h = rng.uniform(-1, 1, (2, d))
	c = rng.uniform(-1, 1, (2, d))
	w_in = rng.uniform(-1, 1, (f_in, 4 * d))
	w_h = rng.uniform(-1, 1, (d, 4 * d))
	b = rng.uniform(-1, 1, (4 * d,))
	cotangent = rng.uniform(-1, 1, (2, d))

	def f(leaves):
		h_next, c_next = ops.lstm_step(*leaves)
		return _weighted(h_next, cotangent) + _weighted(c_next, cotangent)

	return [x, h, c, w_in, w_h, b], f


PRIMITIVES = {
	"add": _binary(ops.add, (2, 3), (3,)),
	"sub": _binary(ops.sub, (2, 3), (1, 3)),
	"mul": _binary(ops.mul),
	"matmul": _binary(ops.matmul, (2, 3), (3, 2)),
	"neg": _unary(ops.neg),
	"tanh": _unary(ops.tanh),
	"sigmoid": _unary(ops.sigmoid),
	"abs": _unary(ops.absolute),
	"square": _unary(ops.square),
	"clip": _unary(lambda x: ops.clip(x, -1.5, 1.5)),
	"log": _log,
	"affine": _affine,
	"reductions": _reductions,
	"shape_ops": _shape_ops,
	"weighted_sum": _weighted_sum,
	"lstm_step": _lstm,
}


@pytest.mark.parametrize("name", sorted(PRIMITIVES))
def test_primitive_grad_matches_finite_differences(name):
	for seed in SEEDS:
		params, f = PRIMITIVES[name](np.random.default_rng(seed))
		assert relative_error(grad(f, params), fd_grad(f, params, h=1e-5)) < 1e-4, (name, seed)


def test_grad_of_sum_of_squares():
	g = grad(lambda leaves: ops.reduce_sum(ops.square(leaves[0])), [np.array([1.0, 2.0])])
	np.testing.assert_allclose(g[0], [2.0, 4.0])


def test_grad_of_constant_is_zero():
	value, g = value_and_grad(lambda leaves: 3.0, [np.array([1.0, -2.0])])
	assert value == 3.0
	np.testing.assert_array_equal(g[0], [0.0, 0.0])


def test_backward_is_bitwise_deterministic():
	params, f = _lstm(np.random.default_rng(7))
	first = grad(f, params)
	second = grad(f, params)
	for a, b in zip(first, second):
		assert np.array_equal(a, b)


def test_reused_node_accumulates_adjoint():
	g = grad(lambda leaves: ops.reduce_sum(ops.mul(leaves[0], leaves[0])), [np.array([3.0])])
	np.testing.assert_allclose(g[0], [6.0])


def test_non_finite_forward_names_the_node():
	tape = Tape()
	x = tape.leaf(np.array([-1.0]))
	with pytest.raises(NumericFailure) as info:
		ops.log(x)
	assert "log" in str(info.value)


def test_backward_requires_scalar():
	tape = Tape()
	x = tape.leaf(np.ones(3))
	with pytest.raises(ValueError):
		tape.backward(ops.square(x), [x])

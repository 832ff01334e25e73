# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Differentiable primitives recorded on a ``Tape``.

Every function accepts tape nodes or plain arrays; plain arrays are lifted to
constants on the tape of the first node argument. Broadcasting follows numpy,
and the vector-Jacobian products sum gradients back over broadcast axes.
"""

import numpy as np
from scipy.special import expit

from autoselect.numcore.tape import Node, Tape


def tape_of(*args) -> Tape:
	for arg in args:
		if isinstance(arg, Node):
			return arg.tape
		if isinstance(arg, (list, tuple)):
			for item in arg:
				if isinstance(item, Node):
					return item.tape
	return Tape()


def lift(value, tape: Tape) -> Node:
	if isinstance(value, Node):
		if value.tape is not tape:
			raise ValueError("cannot mix nodes from different tapes")
		return value
	return tape.constant(value)


def unbroadcast(grad, shape):
	while grad.ndim > len(shape):
		grad = grad.sum(axis=0)
	for axis, extent in enumerate(shape):
		if extent == 1 and grad.shape[axis] != 1:
			grad = grad.sum(axis=axis, keepdims=True)
	return grad


def add(a, b) -> Node:
	tape = tape_of(a, b)
	a, b = lift(a, tape), lift(b, tape)
	sa, sb = a.shape, b.shape
	return tape.record("add", a.value + b.value, (a, b), lambda g: (unbroadcast(g, sa), unbroadcast(g, sb)))


def sub(a, b) -> Node:
	tape = tape_of(a, b)
	a, b = lift(a, tape), lift(b, tape)
	sa, sb = a.shape, b.shape
	return tape.record("sub", a.value - b.value, (a, b), lambda g: (unbroadcast(g, sa), -unbroadcast(g, sb)))


def mul(a, b) -> Node:
	tape = tape_of(a, b)
	a, b = lift(a, tape), lift(b, tape)
	av, bv = a.value, b.value
	return tape.record(
		"mul", av * bv, (a, b), lambda g: (unbroadcast(g * bv, av.shape), unbroadcast(g * av, bv.shape))
	)


def neg(a) -> Node:
	tape = tape_of(a)
	a = lift(a, tape)
	return tape.record("neg", -a.value, (a,), lambda g: (-g,))


def matmul(a, b) -> Node:
	tape = tape_of(a, b)
	a, b = lift(a, tape), lift(b, tape)
	if a.value.ndim != 2 or b.value.ndim != 2:
		raise ValueError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
	av, bv = a.value, b.value
	return tape.record("matmul", av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def affine(x, weight, bias) -> Node:
	"""x @ weight + bias as one node."""
	tape = tape_of(x, weight, bias)
	x, weight, bias = lift(x, tape), lift(weight, tape), lift(bias, tape)
	xv, wv, bshape = x.value, weight.value, bias.shape

	def vjp(g):
		return g @ wv.T, xv.T @ g, unbroadcast(g, bshape)

	return tape.record("affine", xv @ wv + bias.value, (x, weight, bias), vjp)


def tanh(a) -> Node:
	tape = tape_of(a)
	a = lift(a, tape)
	out = np.tanh(a.value)
	return tape.record("tanh", out, (a,), lambda g: (g * (1.0 - out * out),))


def sigmoid(a) -> Node:
	tape = tape_of(a)
	a = lift(a, tape)
	out = expit(a.value)
	return tape.record("sigmoid", out, (a,), lambda g: (g * out * (1.0 - out),))


def log(a) -> Node:
	tape = tape_of(a)
	a = lift(a, tape)
	av = a.value
	with np.errstate(divide="ignore", invalid="ignore"):
		out = np.log(av)
	return tape.record("log", out, (a,), lambda g: (g / av,))


def absolute(a) -> Node:
	tape = tape_of(a)
	a = lift(a, tape)
	av = a.value
	return tape.record("abs", np.abs(av), (a,), lambda g: (g * np.sign(av),))


def square(a) -> Node:
	tape = tape_of(a)
	a = lift(a, tape)
	av = a.value
	return tape.record("square", av * av, (a,), lambda g: (2.0 * g * av,))


def clip(a, low: float, high: float) -> Node:
	tape = tape_of(a)
	a = lift(a, tape)
	av = a.value
	inside = (av >= low) & (av <= high)
	return tape.record("clip", np.clip(av, low, high), (a,), lambda g: (g * inside,))


def _expand(g, shape, axis):
	if axis is None:
		return np.broadcast_to(g, shape).copy()
	axes = (axis,) if isinstance(axis, int) else tuple(axis)
	axes = tuple(ax % len(shape) for ax in axes)
	for ax in sorted(axes):
		g = np.expand_dims(g, ax)
	return np.broadcast_to(g, shape).copy()


def reduce_sum(a, axis=None) -> Node:
	tape = tape_of(a)
	a = lift(a, tape)
	shape = a.shape
	out = np.asarray(a.value.sum(axis=axis), dtype=np.float64)
	return tape.record("sum", out, (a,), lambda g: (_expand(g, shape, axis),))


def mean(a, axis=None) -> Node:
	tape = tape_of(a)
	a = lift(a, tape)
	shape = a.shape
	if axis is None:
		count = a.value.size
	else:
		axes = (axis,) if isinstance(axis, int) else tuple(axis)
		count = int(np.prod([shape[ax] for ax in axes]))
	out = np.asarray(a.value.mean(axis=axis), dtype=np.float64)
	return tape.record("mean", out, (a,), lambda g: (_expand(g, shape, axis) / count,))


def reshape(a, shape) -> Node:
	tape = tape_of(a)
	a = lift(a, tape)
	original = a.shape
	return tape.record("reshape", a.value.reshape(shape), (a,), lambda g: (g.reshape(original),))


def slice_last(a, start: int, stop: int) -> Node:
	"""Columns ``start:stop`` of the last axis."""
	tape = tape_of(a)
	a = lift(a, tape)
	shape = a.shape

	def vjp(g):
		full = np.zeros(shape)
		full[..., start:stop] = g
		return (full,)

	return tape.record("slice", a.value[..., start:stop].copy(), (a,), vjp)


def stack(nodes, axis: int = 0) -> Node:
	tape = tape_of(nodes)
	nodes = tuple(lift(n, tape) for n in nodes)
	out = np.stack([n.value for n in nodes], axis=axis)

	def vjp(g):
		return tuple(np.take(g, i, axis=axis) for i in range(len(nodes)))

	return tape.record("stack", out, nodes, vjp)


def weighted_sum(weights, values) -> Node:
	"""sum_f weights_f * values_f as one node."""
	tape = tape_of(weights, values)
	weights, values = lift(weights, tape), lift(values, tape)
	wv, vv = weights.value, values.value
	out = np.asarray(np.sum(wv * vv), dtype=np.float64)
	return tape.record("weighted_sum", out, (weights, values), lambda g: (g * vv, g * wv))


def lstm_step(x, h, c, w_input, w_hidden, bias):
	"""One LSTM cell step.

	Pre-activations are ``x @ w_input + h @ w_hidden + bias`` with shape
	[B, 4d], split in the order [input, forget, cell, output]:

	    i = sigmoid(z[:, 0:d])     f = sigmoid(z[:, d:2d])
	    g = tanh(z[:, 2d:3d])      o = sigmoid(z[:, 3d:4d])
	    c' = f * c + i * g         h' = o * tanh(c')

	Returns ``(h', c')``.
	"""
	d = w_hidden.shape[0]
	z = add(affine(x, w_input, bias), matmul(h, w_hidden))
	gate_i = sigmoid(slice_last(z, 0, d))
	gate_f = sigmoid(slice_last(z, d, 2 * d))
	gate_g = tanh(slice_last(z, 2 * d, 3 * d))
	gate_o = sigmoid(slice_last(z, 3 * d, 4 * d))
	c_next = add(mul(gate_f, c), mul(gate_i, gate_g))
	h_next = mul(gate_o, tanh(c_next))
	return h_next, c_next

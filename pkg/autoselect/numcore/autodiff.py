# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Gradients, finite-difference oracles and Hessian-vector products.

An objective is any callable ``f(leaves) -> Node`` built from numcore.ops;
``params`` is the list of arrays the leaves are created from.
"""

from collections.abc import Callable, Sequence

import numpy as np

from autoselect.numcore.tape import Node, Tape
from autoselect.numcore.tensor import Tensor, inf_norm

Objective = Callable[[list[Node]], Node]


def _forward(f: Objective, params: Sequence[Tensor]):
	tape = Tape()
	leaves = [tape.leaf(p, name=f"param{i}") for i, p in enumerate(params)]
	out = f(leaves)
	if not isinstance(out, Node):
		out = tape.constant(out)
	if out.value.size != 1:
		raise ValueError(f"objective must be scalar, got shape {out.value.shape}")
	return tape, leaves, out


def value_and_grad(f: Objective, params: Sequence[Tensor]) -> tuple[float, list[Tensor]]:
	tape, leaves, out = _forward(f, params)
	return float(out.value), tape.backward(out, leaves)


def grad(f: Objective, params: Sequence[Tensor]) -> list[Tensor]:
	return value_and_grad(f, params)[1]


def evaluate(f: Objective, params: Sequence[Tensor]) -> float:
	return float(_forward(f, params)[2].value)


def fd_grad(f: Objective, params: Sequence[Tensor], h: float = 1e-5) -> list[Tensor]:
	"""Central differences, one coordinate at a time.

	At a kink such as |x| at 0 the symmetric difference returns 0, which is
	one admissible subgradient rather than a derivative.
	"""
	if h <= 0:
		raise ValueError("finite-difference step must be positive")
	base = [np.array(p, dtype=np.float64) for p in params]
	grads = []
	for k, p in enumerate(base):
		g = np.zeros_like(p)
		flat = g.reshape(-1)
		for i in range(p.size):
			plus = [q.copy() for q in base]
			minus = [q.copy() for q in base]
			plus[k].reshape(-1)[i] += h
			minus[k].reshape(-1)[i] -= h
			flat[i] = (evaluate(f, plus) - evaluate(f, minus)) / (2.0 * h)
		grads.append(g)
	return grads


def hvp(f: Objective, params: Sequence[Tensor], v: Sequence[Tensor], h: float | None = None) -> list[Tensor]:
	"""H(params) @ v from central differences of exact gradients.

	The direction is normalised to unit max-norm before stepping and the
	result rescaled, so tiny or huge multipliers get the same relative accuracy.
	"""
	if len(v) != len(params):
		raise ValueError(f"{len(v)} direction tensors for {len(params)} parameters")
	scale = inf_norm(list(v))
	if scale == 0.0:
		return [np.zeros_like(np.asarray(p, dtype=np.float64)) for p in params]
	if h is None:
		h = 1e-5 * (1.0 + inf_norm([np.asarray(p) for p in params]))
	direction = [np.asarray(d, dtype=np.float64) / scale for d in v]
	g_plus = grad(f, [p + h * d for p, d in zip(params, direction)])
	g_minus = grad(f, [p - h * d for p, d in zip(params, direction)])
	return [(gp - gm) * (scale / (2.0 * h)) for gp, gm in zip(g_plus, g_minus)]


def relative_error(a, b) -> float:
	"""max |a-b| / max(|a|, |b|, 1e-8) over all entries."""
	if isinstance(a, (list, tuple)):
		return max((relative_error(x, y) for x, y in zip(a, b)), default=0.0)
	a = np.asarray(a, dtype=np.float64)
	b = np.asarray(b, dtype=np.float64)
	if a.size == 0:
		return 0.0
	denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)
	return float(np.max(np.abs(a - b) / denom))

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Reverse-mode differentiation tape.

Nodes are appended in evaluation order, so the node list is already a
topological order. ``Tape.backward`` walks it once in reverse, visiting every
node at most once, with no reordering; two backward passes over the same
inputs therefore produce bitwise-identical adjoints.
"""

from collections.abc import Callable, Sequence

import numpy as np

from autoselect.exceptions import NumericFailure
from autoselect.numcore.tensor import Tensor

VJP = Callable[[Tensor], Sequence[Tensor | None]]


class Node:
	__slots__ = ("tape", "index", "value", "op", "parents", "vjp")

	def __init__(self, tape, index, value, op, parents, vjp):
		self.tape = tape
		self.index = index
		self.value = value
		self.op = op
		self.parents = parents
		self.vjp = vjp

	@property
	def shape(self):
		return self.value.shape

	def __repr__(self):
		return f"Node({self.index}, {self.op}, shape={self.value.shape})"

	# arithmetic sugar; the primitives themselves live in numcore.ops

	def __add__(self, other):
		from autoselect.numcore import ops

		return ops.add(self, other)


class Tape:
	def __init__(self):
		self.nodes: list[Node] = []

	def __len__(self):
		return len(self.nodes)

	def leaf(self, value, name="leaf") -> Node:
		arr = np.array(value, dtype=np.float64)
		return self.record(name, arr, (), None)

	def constant(self, value) -> Node:
		return self.leaf(value, name="const")

	def record(self, op: str, value: Tensor, parents: tuple[Node, ...], vjp: VJP | None) -> Node:
		node = Node(self, len(self.nodes), value, op, parents, vjp)
		if not np.all(np.isfinite(value)):
			raise NumericFailure(f"non-finite value at node {node.index} ({op})", node=f"{node.index}:{op}")
		self.nodes.append(node)
		return node

	def backward(self, output: Node, wrt: Sequence[Node]) -> list[Tensor]:
		if output.tape is not self:
			raise ValueError("output node belongs to a different tape")
		if output.value.size != 1:
			raise ValueError(f"backward needs a scalar output, got shape {output.value.shape}")

		adjoints: list[Tensor | None] = [None] * (output.index + 1)
		adjoints[output.index] = np.ones_like(output.value)

		for node in reversed(self.nodes[: output.index + 1]):
			adj = adjoints[node.index]
			if adj is None or node.vjp is None:
				continue
			if not np.all(np.isfinite(adj)):
				raise NumericFailure(
					f"non-finite adjoint at node {node.index} ({node.op})", node=f"{node.index}:{node.op}"
				)
			for parent, contribution in zip(node.parents, node.vjp(adj)):
				if contribution is None:
					continue
				current = adjoints[parent.index]
				adjoints[parent.index] = contribution if current is None else current + contribution

		grads = []
		for node in wrt:
			adj = adjoints[node.index] if node.index < len(adjoints) else None
			grads.append(np.zeros_like(node.value) if adj is None else np.array(adj, dtype=np.float64))
		return grads

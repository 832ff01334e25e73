# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from dataclasses import dataclass, field

import numpy as np

from autoselect.numcore.ops import lift
from autoselect.numcore.rng import RngStream
from autoselect.numcore.tape import Node, Tape
from autoselect.numcore.tensor import Tensor

BLOCKS = ("encoder", "decoder", "classifier")


@dataclass
class ModelParams:
	"""The three parameter blocks theta^e, theta^d, theta^c as ordered name -> array maps."""

	encoder: dict[str, Tensor] = field(default_factory=dict)
	decoder: dict[str, Tensor] = field(default_factory=dict)
	classifier: dict[str, Tensor] = field(default_factory=dict)

	def block(self, name: str) -> dict[str, Tensor]:
		if name not in BLOCKS:
			raise KeyError(f"unknown parameter block {name}")
		return getattr(self, name)

	def arrays(self, *blocks: str) -> list[Tensor]:
		return [arr for b in blocks for arr in self.block(b).values()]

	def keys(self, *blocks: str) -> list[tuple[str, str]]:
		return [(b, k) for b in blocks for k in self.block(b)]

	def replace(self, blocks: tuple[str, ...], arrays: list[Tensor]) -> "ModelParams":
		"""New params with ``blocks`` taken, in order, from ``arrays``."""
		updated = {b: dict(self.block(b)) for b in BLOCKS}
		keys = self.keys(*blocks)
		if len(keys) != len(arrays):
			raise ValueError(f"{len(arrays)} arrays for {len(keys)} parameters")
		for (b, k), arr in zip(keys, arrays):
			updated[b][k] = np.array(arr, dtype=np.float64)
		return ModelParams(**updated)

	def with_block(self, name: str, values: dict[str, Tensor]) -> "ModelParams":
		updated = {b: dict(self.block(b)) for b in BLOCKS}
		updated[name] = {k: np.array(v, dtype=np.float64) for k, v in values.items()}
		return ModelParams(**updated)

	def copy(self) -> "ModelParams":
		return ModelParams(**{b: {k: v.copy() for k, v in self.block(b).items()} for b in BLOCKS})

	def shapes(self) -> dict[str, dict[str, tuple[int, ...]]]:
		return {b: {k: tuple(v.shape) for k, v in self.block(b).items()} for b in BLOCKS}

	def size(self, *blocks: str) -> int:
		return int(sum(arr.size for arr in self.arrays(*(blocks or BLOCKS))))


def bind(nodes: list[Node], params: ModelParams, blocks: tuple[str, ...]) -> dict[str, dict[str, Node]]:
	"""Map a flat list of tape leaves back onto named blocks."""
	keys = params.keys(*blocks)
	if len(keys) != len(nodes):
		raise ValueError(f"{len(nodes)} leaves for {len(keys)} parameters")
	bound: dict[str, dict[str, Node]] = {b: {} for b in blocks}
	for (b, k), node in zip(keys, nodes):
		bound[b][k] = node
	return bound


def on_tape(block: dict, tape: Tape) -> dict[str, Node]:
	return {k: lift(v, tape) for k, v in block.items()}


def _uniform(rng: np.random.Generator, shape, hidden_size: int) -> Tensor:
	bound = 1.0 / np.sqrt(hidden_size)
	return rng.uniform(-bound, bound, size=shape)


def init_encoder(n_features: int, hidden_size: int, seed: int) -> dict[str, Tensor]:
	rng = RngStream(seed, "init_encoder").generator()
	d = hidden_size
	return {
		"w_input": _uniform(rng, (n_features, 4 * d), d),
		"w_hidden": _uniform(rng, (d, 4 * d), d),
		"bias": np.zeros(4 * d),
	}


def init_decoder(n_features: int, hidden_size: int, seed: int) -> dict[str, Tensor]:
	rng = RngStream(seed, "init_decoder").generator()
	d = hidden_size
	return {
		"w_input": _uniform(rng, (n_features, 4 * d), d),
		"w_hidden": _uniform(rng, (d, 4 * d), d),
		"bias": np.zeros(4 * d),
		"w_out": _uniform(rng, (d, n_features), d),
		"b_out": np.zeros(n_features),
	}


def init_classifier(hidden_size: int, seed: int, index: int = 0) -> dict[str, Tensor]:
	rng = RngStream(seed, "init_classifier", index).generator()
	return {"weight": _uniform(rng, (hidden_size, 1), hidden_size), "bias": np.zeros(1)}


def init_params(n_features: int, hidden_size: int, seed: int) -> ModelParams:
	"""The one model factory every arm builds from."""
	if n_features < 1 or hidden_size < 1:
		raise ValueError("n_features and hidden_size must be positive")
	return ModelParams(
		encoder=init_encoder(n_features, hidden_size, seed),
		decoder=init_decoder(n_features, hidden_size, seed),
		classifier=init_classifier(hidden_size, seed),
	)

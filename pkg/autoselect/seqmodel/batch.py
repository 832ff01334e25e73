# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from dataclasses import dataclass

import numpy as np

from autoselect.numcore.tensor import Tensor


@dataclass(frozen=True)
class SeqBatch:
	"""values/mask are [B, T, F]; labels [B] only on primary-task batches.

	Imputed cells carry mask 0 and never act as forecast targets.
	"""

	values: Tensor
	mask: Tensor
	labels: Tensor | None = None

	def __post_init__(self):
		if self.values.shape != self.mask.shape:
			raise ValueError(f"values {self.values.shape} and mask {self.mask.shape} differ")
		if self.values.ndim != 3:
			raise ValueError(f"expected [B, T, F] values, got {self.values.shape}")
		if self.labels is not None and self.labels.shape != (self.values.shape[0],):
			raise ValueError(f"labels {self.labels.shape} do not match batch size {self.values.shape[0]}")

	@property
	def size(self) -> int:
		return self.values.shape[0]

	@property
	def n_features(self) -> int:
		return self.values.shape[2]

	def observation(self, tau: int) -> Tensor:
		return self.values[:, :tau, :]

	def last_observed(self, tau: int) -> Tensor:
		return self.values[:, tau - 1, :]

	def targets(self, tau: int, horizon: int) -> tuple[Tensor, Tensor]:
		if tau + horizon > self.values.shape[1]:
			raise ValueError(f"tau + horizon = {tau + horizon} exceeds {self.values.shape[1]} steps")
		return self.values[:, tau : tau + horizon, :], self.mask[:, tau : tau + horizon, :]

	def take(self, index) -> "SeqBatch":
		index = np.asarray(index)
		labels = None if self.labels is None else self.labels[index]
		return SeqBatch(self.values[index], self.mask[index], labels)

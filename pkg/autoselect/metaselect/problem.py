# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""The inner problems the meta-learner differentiates through.

A problem turns named parameter blocks (maps of tape nodes) and a batch into
the per-task pretraining losses [F] and the scalar supervised loss.
"""

from typing import Protocol

import numpy as np

from autoselect.numcore.tape import Node
from autoselect.seqmodel.batch import SeqBatch
from autoselect.seqmodel.model import classification_loss, classify, forecast, per_task_mse, task_losses


class BilevelProblem(Protocol):
	n_tasks: int

	def pretrain_task_losses(self, encoder: dict, decoder: dict, batch) -> Node: ...

	def task_mse(self, encoder: dict, decoder: dict, batch) -> tuple[np.ndarray, np.ndarray]: ...

	def supervised_loss(self, encoder: dict, classifier: dict, batch) -> Node: ...

	def score(self, encoder: dict, classifier: dict, batch) -> np.ndarray: ...


class SeqProblem:
	"""Trajectory forecasting on every channel plus the primary classifier."""

	def __init__(self, n_tasks: int, tau: int, horizon: int):
		self.n_tasks = n_tasks
		self.tau = tau
		self.horizon = horizon

	def pretrain_task_losses(self, encoder, decoder, batch: SeqBatch) -> Node:
		targets, mask = batch.targets(self.tau, self.horizon)
		return task_losses(forecast(encoder, decoder, batch, self.tau, self.horizon), targets, mask)

	def task_mse(self, encoder, decoder, batch: SeqBatch) -> tuple[np.ndarray, np.ndarray]:
		"""Per-task MSE off the tape and the tasks with no observed target in ``batch``."""
		targets, mask = batch.targets(self.tau, self.horizon)
		return per_task_mse(forecast(encoder, decoder, batch, self.tau, self.horizon).value, targets, mask)

	def supervised_loss(self, encoder, classifier, batch: SeqBatch) -> Node:
		return classification_loss(classify(encoder, classifier, batch.values, self.tau), batch.labels)

	def score(self, encoder, classifier, batch: SeqBatch) -> np.ndarray:
		return classify(encoder, classifier, batch.values, self.tau).value

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from autoselect.exceptions import NumericFailure


@dataclass(frozen=True)
class TaskWeights:
	"""Task weights as softmax(logits).

	A logit of -inf pins its task to weight exactly 0 (used for fixed task
	subsets); every other logit must be finite.
	"""

	logits: np.ndarray

	def __post_init__(self):
		logits = np.asarray(self.logits, dtype=np.float64)
		if logits.ndim != 1 or logits.size == 0:
			raise ValueError("logits must be a non-empty vector")
		if np.isnan(logits).any() or np.isposinf(logits).any() or not np.isfinite(logits).any():
			raise NumericFailure("task logits must be finite or -inf", node="lambda")
		object.__setattr__(self, "logits", logits)

	@classmethod
	def uniform(cls, n_tasks: int) -> "TaskWeights":
		return cls(np.zeros(n_tasks))

	@classmethod
	def subset(cls, n_tasks: int, tasks) -> "TaskWeights":
		logits = np.full(n_tasks, -np.inf)
		logits[list(tasks)] = 0.0
		return cls(logits)

	@property
	def weights(self) -> np.ndarray:
		return softmax(self.logits)

	def __len__(self):
		return self.logits.size


def logit_gradient(weights: np.ndarray, g_lambda: np.ndarray) -> np.ndarray:
	"""Chain a weight-space gradient through the softmax."""
	return weights * (g_lambda - weights @ g_lambda)


def update_lambda(task_weights: TaskWeights, g_lambda, meta_lr: float) -> TaskWeights:
	"""One descent step in logit space; the result is always on the simplex."""
	g_lambda = np.asarray(g_lambda, dtype=np.float64)
	if g_lambda.shape != task_weights.logits.shape:
		raise ValueError(f"gradient shape {g_lambda.shape} does not match {task_weights.logits.shape}")
	if not np.all(np.isfinite(g_lambda)):
		raise NumericFailure("non-finite task-weight gradient", node="g_lambda")
	step = logit_gradient(task_weights.weights, g_lambda)
	return TaskWeights(task_weights.logits - meta_lr * step)

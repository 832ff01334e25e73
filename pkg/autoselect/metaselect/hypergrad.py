# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Hyper-gradients of the validation loss with respect to the task weights.

Three estimators share one result type:

* ``first_order_hypergrad``: g = (sum_j c_j / a_j) * b from the factors of the
  last pretraining and finetuning steps, no second-order terms.
* ``exact_hypergrad``: reverse-mode through every retained inner iterate.
  The multiplier runs backward through the finetuning steps over
  (theta^e, theta^c), hands its encoder part to the pretraining phase, runs
  backward over (theta^e, theta^d) and accumulates the mixed
  lambda/parameter curvature on the way. Hessian products come from
  ``numcore.hvp``.
* ``fd_hypergrad``: central differences of the whole unrolled training in
  logit space.

Estimates are compared in logit space (``HyperGradient.logit_gradient``),
where the simplex constraint no longer leaves a free direction.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.special import softmax

from autoselect.exceptions import TraceLimitError
from autoselect.metaselect.loops import (
	FINETUNE_BLOCKS,
	PRETRAIN_BLOCKS,
	FixedStream,
	InnerTrace,
	inner_finetune,
	inner_pretrain,
	supervised_objective,
)
from autoselect.metaselect.weights import logit_gradient
from autoselect.numcore import ops
from autoselect.numcore.autodiff import evaluate, hvp, value_and_grad
from autoselect.numcore.tensor import flatten
from autoselect.seqmodel.params import ModelParams, bind

logger = logging.getLogger(__name__)

RECIPROCAL_GUARD = 1e-8
DEGENERATE_BELOW = 1e-12
MAX_TRACE_PARAMS = 2000
MAX_TRACE_STEPS = 10


@dataclass
class HyperGradient:
	g: np.ndarray
	method: str
	space: str = "lambda"
	diagnostics: dict = field(default_factory=dict)

	def logit_gradient(self, weights) -> np.ndarray:
		if self.space == "logit":
			return self.g
		return logit_gradient(np.asarray(weights, dtype=np.float64), self.g)


def _guarded(a: np.ndarray) -> np.ndarray:
	return a + np.where(a >= 0, 1.0, -1.0) * RECIPROCAL_GUARD


def first_order_hypergrad(a, b, c, contraction: str = "scalar", task_a: np.ndarray | None = None) -> HyperGradient:
	"""g = s * b with s = sum_j c_j / (a_j + sign(a_j) 1e-8).

	``contraction="per_task"`` takes a_j from each task's own encoder
	gradient (``task_a``, shape [F, P]) so every task gets its own s.
	"""
	a_flat = flatten(list(a)) if isinstance(a, (list, tuple)) else np.ravel(a)
	c_flat = flatten(list(c)) if isinstance(c, (list, tuple)) else np.ravel(c)
	b = np.asarray(b, dtype=np.float64)
	if a_flat.shape != c_flat.shape:
		raise ValueError(f"a has {a_flat.size} entries, c has {c_flat.size}")

	if contraction == "scalar":
		s = float(np.sum(c_flat / _guarded(a_flat)))
		g = s * b
		reference = a_flat
	elif contraction == "per_task":
		if task_a is None or task_a.shape != (b.size, a_flat.size):
			raise ValueError("per-task contraction needs task_a of shape [F, P]")
		s = np.sum(c_flat[None, :] / _guarded(task_a), axis=1)
		g = s * b
		reference = task_a
	else:
		raise ValueError(f"unknown contraction {contraction}")

	degenerate_share = float(np.mean(np.abs(reference) < DEGENERATE_BELOW)) if reference.size else 0.0
	diagnostics = {
		"norm_a": float(np.linalg.norm(a_flat)),
		"norm_b": float(np.linalg.norm(b)),
		"norm_c": float(np.linalg.norm(c_flat)),
		"contraction": contraction,
		"degenerate": degenerate_share > 0.5,
	}
	if diagnostics["degenerate"]:
		logger.warning("degenerate hyper-gradient: %.0f%% of |a| below %g", 100 * degenerate_share, DEGENERATE_BELOW)
	return HyperGradient(g, "first_order", diagnostics=diagnostics)


def _augmented_pretrain(problem, template: ModelParams, batch):
	def objective(leaves):
		bound = bind(leaves[1:], template, PRETRAIN_BLOCKS)
		return ops.weighted_sum(leaves[0], problem.pretrain_task_losses(bound["encoder"], bound["decoder"], batch))

	return objective


def exact_hypergrad(
	problem,
	trace: InnerTrace,
	finetuned: ModelParams,
	weights,
	val_batch,
	pretrain_lr: float,
	finetune_lr: float,
	encoder_only: bool = False,
) -> HyperGradient:
	n_pretrain, n_finetune = len(trace.pretrain_iterates), len(trace.finetune_iterates)
	if finetuned.size() > MAX_TRACE_PARAMS or n_pretrain + n_finetune > MAX_TRACE_STEPS:
		raise TraceLimitError(
			f"exact hyper-gradient limited to {MAX_TRACE_PARAMS} parameters and {MAX_TRACE_STEPS} inner steps, "
			f"got {finetuned.size()} and {n_pretrain + n_finetune}; use the first-order path"
		)
	weights = np.asarray(weights, dtype=np.float64)
	n_enc = len(finetuned.encoder)

	_, beta = value_and_grad(supervised_objective(problem, finetuned, val_batch), finetuned.arrays(*FINETUNE_BLOCKS))
	c = [x.copy() for x in beta[:n_enc]]
	for k in reversed(range(n_finetune)):
		objective = supervised_objective(problem, finetuned, trace.finetune_batches[k])
		curvature = hvp(objective, trace.finetune_iterates[k], beta)
		beta = [x - finetune_lr * h for x, h in zip(beta, curvature)]

	alpha = beta[:n_enc] + [np.zeros_like(x) for x in finetuned.arrays("decoder")]
	g = np.zeros_like(weights)
	for i in reversed(range(n_pretrain)):
		objective = _augmented_pretrain(problem, finetuned, trace.pretrain_batches[i])
		curvature = hvp(objective, [weights, *trace.pretrain_iterates[i]], [np.zeros_like(weights), *alpha])
		g -= pretrain_lr * curvature[0]
		alpha = [x - pretrain_lr * h for x, h in zip(alpha, curvature[1:])]
		if encoder_only:
			alpha = alpha[:n_enc] + [np.zeros_like(x) for x in alpha[n_enc:]]

	method = "exact_encoder_only" if encoder_only else "exact"
	diagnostics = {"norm_c": float(np.linalg.norm(flatten(c))), "norm_alpha": float(np.linalg.norm(flatten(alpha)))}
	return HyperGradient(g, method, diagnostics=diagnostics)


def unrolled_validation_loss(
	problem,
	start: ModelParams,
	trace: InnerTrace,
	val_batch,
	pretrain_lr: float,
	finetune_lr: float,
) -> Callable[[np.ndarray], float]:
	"""logits -> validation loss after replaying the recorded inner loops.

	``start`` holds theta^e_0, theta^d_0 and the finetuning head theta^c_0.
	"""
	n_pretrain, n_finetune = len(trace.pretrain_batches), len(trace.finetune_batches)

	def closure(logits: np.ndarray) -> float:
		pre = inner_pretrain(problem, start, softmax(logits), n_pretrain, pretrain_lr, FixedStream(trace.pretrain_batches))
		params = pre.params.with_block("classifier", start.classifier)
		if n_finetune:
			params, _ = inner_finetune(problem, params, n_finetune, finetune_lr, FixedStream(trace.finetune_batches))
		return evaluate(supervised_objective(problem, params, val_batch), params.arrays(*FINETUNE_BLOCKS))

	return closure


def fd_hypergrad(closure: Callable[[np.ndarray], float], logits, h: float = 1e-4) -> HyperGradient:
	"""Central differences of ``closure`` per logit."""
	if h <= 0:
		raise ValueError("finite-difference step must be positive")
	logits = np.asarray(logits, dtype=np.float64)
	g = np.zeros_like(logits)
	for f in range(logits.size):
		if not np.isfinite(logits[f]):
			continue
		step = np.zeros_like(logits)
		step[f] = h
		g[f] = (closure(logits + step) - closure(logits - step)) / (2.0 * h)
	return HyperGradient(g, "finite_difference", space="logit")

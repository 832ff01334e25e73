# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Inner training loops: plain gradient steps on named parameter blocks."""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from autoselect.evalkit.dynamics import DynamicsLog
from autoselect.evalkit.metrics import auc_roc
from autoselect.exceptions import ConfigError, DivergenceError, UndefinedMetricError
from autoselect.numcore import ops
from autoselect.numcore.autodiff import value_and_grad
from autoselect.numcore.rng import RngStream
from autoselect.seqmodel.params import ModelParams, bind

logger = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e6
PRETRAIN_BLOCKS = ("encoder", "decoder")
FINETUNE_BLOCKS = ("encoder", "classifier")


class BatchStream:
	"""Seeded mini-batches over a fixed index set, reshuffled every epoch."""

	def __init__(self, index, batch_size: int, rng_stream: RngStream, make_batch: Callable):
		self.index = np.asarray(index, dtype=int)
		if self.index.size == 0:
			raise ConfigError("cannot sample batches from an empty index set")
		self.batch_size = min(batch_size, self.index.size)
		self.make_batch = make_batch
		self._rng = rng_stream.generator()
		self._order = np.zeros(0, dtype=int)
		self._cursor = 0

	def next(self):
		if self._cursor + self.batch_size > self._order.size:
			self._order = self._rng.permutation(self.index)
			self._cursor = 0
		chosen = self._order[self._cursor : self._cursor + self.batch_size]
		self._cursor += self.batch_size
		return self.make_batch(np.sort(chosen))


class FixedStream:
	"""Always the same batch; used by closed-form fixtures and replays."""

	def __init__(self, batches):
		self.batches = list(batches)
		self._cursor = 0

	def next(self):
		batch = self.batches[self._cursor % len(self.batches)]
		self._cursor += 1
		return batch


@dataclass
class InnerTrace:
	"""Iterates and batches of one inner loop, kept for the exact hyper-gradient."""

	pretrain_batches: list = field(default_factory=list)
	pretrain_iterates: list[list[np.ndarray]] = field(default_factory=list)
	finetune_batches: list = field(default_factory=list)
	finetune_iterates: list[list[np.ndarray]] = field(default_factory=list)


@dataclass
class PretrainResult:
	params: ModelParams
	a: list[np.ndarray]
	b: np.ndarray
	losses: list[float]
	task_a: np.ndarray | None = None
	unobserved: np.ndarray | None = None

	@property
	def final_loss(self) -> float:
		return self.losses[-1]


def check_loss(loss: float, step: int, phase: str, partial_log=None):
	if not np.isfinite(loss) or loss > DIVERGENCE_LIMIT:
		logger.error("%s diverged at step %d (loss %.3g)", phase, step, loss)
		raise DivergenceError(f"{phase} loss {loss:.3g} at step {step} exceeds {DIVERGENCE_LIMIT:g}", partial_log)


def pretrain_objective(problem, params: ModelParams, weights, batch):
	def objective(leaves):
		bound = bind(leaves, params, PRETRAIN_BLOCKS)
		return ops.weighted_sum(weights, problem.pretrain_task_losses(bound["encoder"], bound["decoder"], batch))

	return objective


def supervised_objective(problem, params: ModelParams, batch):
	def objective(leaves):
		bound = bind(leaves, params, FINETUNE_BLOCKS)
		return problem.supervised_loss(bound["encoder"], bound["classifier"], batch)

	return objective


def _factors(problem, params: ModelParams, weights, batch, per_task: bool):
	"""a = dl^p/d theta^e, b = dl^p/d lambda, per-task encoder gradients on demand.

	Also returns the tasks with no observed target in ``batch``; their b entry is 0.
	"""
	n_enc = len(params.encoder)
	arrays = params.arrays(*PRETRAIN_BLOCKS)

	def objective(leaves):
		bound = bind(leaves[1:], params, PRETRAIN_BLOCKS)
		return ops.weighted_sum(leaves[0], problem.pretrain_task_losses(bound["encoder"], bound["decoder"], batch))

	_, grads = value_and_grad(objective, [np.asarray(weights, dtype=np.float64), *arrays])
	b, a = grads[0], grads[1 : 1 + n_enc]

	task_a = None
	if per_task:
		rows = []
		for f in range(problem.n_tasks):
			onehot = np.zeros(problem.n_tasks)
			onehot[f] = 1.0
			_, g = value_and_grad(pretrain_objective(problem, params, onehot, batch), arrays)
			rows.append(np.concatenate([x.ravel() for x in g[:n_enc]]))
		task_a = np.stack(rows)
	_, unobserved = problem.task_mse(params.encoder, params.decoder, batch)
	return a, b, task_a, unobserved


def inner_pretrain(
	problem,
	params: ModelParams,
	weights,
	n_steps: int,
	lr: float,
	stream,
	trace: InnerTrace | None = None,
	per_task: bool = False,
	dynamics: DynamicsLog | None = None,
	step_offset: int = 0,
	log_every: int = 10,
) -> PretrainResult:
	"""``n_steps`` SGD steps on sum_f weights_f * l_f over (theta^e, theta^d).

	The factors a and b are taken at the final iterate on the last batch.
	"""
	if n_steps < 1:
		raise ConfigError("pretraining needs at least one step")
	weights = np.asarray(weights, dtype=np.float64)
	arrays = params.arrays(*PRETRAIN_BLOCKS)
	losses = []
	batch = None
	for step in range(n_steps):
		batch = stream.next()
		if trace is not None:
			trace.pretrain_batches.append(batch)
			trace.pretrain_iterates.append([x.copy() for x in arrays])
		loss, grads = value_and_grad(pretrain_objective(problem, params, weights, batch), arrays)
		check_loss(loss, step, "pretrain")
		losses.append(loss)
		arrays = [x - lr * g for x, g in zip(arrays, grads)]
		if (step + 1) % log_every == 0:
			logger.debug("pretrain step %d loss %.5f", step + 1, loss)
			if dynamics is not None:
				dynamics.add(step_offset + step + 1, "train", "pretrain_loss", loss)

	params = params.replace(PRETRAIN_BLOCKS, arrays)
	a, b, task_a, unobserved = _factors(problem, params, weights, batch, per_task)
	return PretrainResult(params, a, b, losses, task_a, unobserved)


def inner_finetune(
	problem,
	params: ModelParams,
	n_steps: int,
	lr: float,
	stream,
	trace: InnerTrace | None = None,
) -> tuple[ModelParams, list[float]]:
	"""``n_steps`` SGD steps on the supervised loss over (theta^e, theta^c)."""
	arrays = params.arrays(*FINETUNE_BLOCKS)
	losses = []
	for step in range(n_steps):
		batch = stream.next()
		if trace is not None:
			trace.finetune_batches.append(batch)
			trace.finetune_iterates.append([x.copy() for x in arrays])
		loss, grads = value_and_grad(supervised_objective(problem, params, batch), arrays)
		check_loss(loss, step, "finetune")
		losses.append(loss)
		arrays = [x - lr * g for x, g in zip(arrays, grads)]
	return params.replace(FINETUNE_BLOCKS, arrays), losses


def validation_auc(problem, params: ModelParams, batch) -> float:
	try:
		return auc_roc(problem.score(params.encoder, params.classifier, batch), batch.labels)
	except UndefinedMetricError:
		return float("nan")


def finetune_with_early_stopping(
	problem,
	params: ModelParams,
	max_steps: int,
	lr: float,
	stream,
	stop_batch,
	check_every: int = 50,
	patience: int = 10,
	dynamics: DynamicsLog | None = None,
	step_offset: int = 0,
	loss_fn: Callable | None = None,
	blocks: tuple[str, ...] = FINETUNE_BLOCKS,
) -> tuple[ModelParams, int]:
	"""Train for at most ``max_steps``, keeping the best stop-val AUC checkpoint.

	Checks happen every ``check_every`` steps; training ends after ``patience``
	checks without improvement. ``loss_fn(params, batch)`` returns the
	objective over ``blocks`` in place of the supervised one (co-training).
	"""
	best = params
	best_auc = validation_auc(problem, params, stop_batch) if stop_batch is not None else float("nan")
	stale = 0
	arrays = params.arrays(*blocks)
	current = params
	step = 0
	for step in range(1, max_steps + 1):
		batch = stream.next()
		if loss_fn is None:
			objective = supervised_objective(problem, current, batch)
		else:
			objective = loss_fn(current, batch)
		loss, grads = value_and_grad(objective, arrays)
		check_loss(loss, step, "finetune")
		arrays = [x - lr * g for x, g in zip(arrays, grads)]
		current = current.replace(blocks, arrays)
		if step % check_every and step != max_steps:
			continue
		if dynamics is not None:
			dynamics.add(step_offset + step, "train", "loss", loss)
		if stop_batch is None:
			best = current
			continue
		auc = validation_auc(problem, current, stop_batch)
		if dynamics is not None:
			dynamics.add(step_offset + step, "stop_val", "auc_roc", auc)
		if np.isnan(best_auc) or auc > best_auc:
			best, best_auc, stale = current, auc, 0
		else:
			stale += 1
			if stale >= patience:
				logger.info("early stop at step %d (best stop-val AUC %.3f)", step, best_auc)
				break
	return best, step

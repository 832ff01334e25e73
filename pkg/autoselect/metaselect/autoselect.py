# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""The outer loop: alternate inner pretraining and finetuning, then move the task weights.

``bilevel_pretrain`` is the one driver behind AutoSelect (``meta_lr > 0``),
Pretrain (All) (uniform weights, no update) and the Top/Down ablations (fixed
subset weights), so their training logs line up row for row.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from autoselect.evalkit.dynamics import DynamicsLog
from autoselect.exceptions import ConfigError, DivergenceError
from autoselect.metaselect.hypergrad import exact_hypergrad, first_order_hypergrad
from autoselect.metaselect.loops import (
	FINETUNE_BLOCKS,
	BatchStream,
	InnerTrace,
	finetune_with_early_stopping,
	inner_finetune,
	inner_pretrain,
	supervised_objective,
	validation_auc,
)
from autoselect.metaselect.schedule import LoopSchedule
from autoselect.metaselect.weights import TaskWeights, update_lambda
from autoselect.numcore.autodiff import value_and_grad
from autoselect.numcore.rng import RngStream
from autoselect.seqmodel.params import ModelParams, init_classifier

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["outer_step", "pretrain_loss", "val_auc"]


@dataclass
class TrainingLog:
	"""One row per outer step: ``outer_step,pretrain_loss,val_auc,lambda_0..lambda_{F-1}``."""

	n_tasks: int
	rows: list[tuple] = field(default_factory=list)

	@property
	def columns(self) -> list[str]:
		return LOG_COLUMNS + [f"lambda_{f}" for f in range(self.n_tasks)]

	def add(self, outer_step: int, pretrain_loss: float, val_auc: float, weights):
		weights = np.asarray(weights, dtype=np.float64)
		if weights.size != self.n_tasks:
			raise ValueError(f"expected {self.n_tasks} task weights, got {weights.size}")
		self.rows.append((int(outer_step), float(pretrain_loss), float(val_auc), *map(float, weights)))

	def __len__(self):
		return len(self.rows)

	@property
	def lambdas(self) -> np.ndarray:
		return np.array([row[len(LOG_COLUMNS) :] for row in self.rows]).reshape(len(self.rows), self.n_tasks)

	def to_frame(self) -> pd.DataFrame:
		return pd.DataFrame(self.rows, columns=self.columns)

	def write_csv(self, path: str | Path) -> Path:
		path = Path(path)
		self.to_frame().to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
		return path


@dataclass
class BilevelData:
	"""Index sets of one fold into a prepared dataset.

	The pretraining pool ignores labels; the primary-task train subset,
	meta-val and stop-val carry them.
	"""

	dataset: object
	pretrain_index: np.ndarray
	train_index: np.ndarray
	meta_val_index: np.ndarray
	stop_val_index: np.ndarray
	test_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

	def pretrain_stream(self, batch_size: int, seed: int) -> BatchStream:
		return BatchStream(
			self.pretrain_index,
			batch_size,
			RngStream(seed, "pretrain_batches"),
			lambda index: self.dataset.batch(index, with_labels=False),
		)

	def train_stream(self, batch_size: int, seed: int, purpose: str = "finetune_batches") -> BatchStream:
		return BatchStream(self.train_index, batch_size, RngStream(seed, purpose), self.dataset.batch)

	def meta_val_batch(self):
		return self.dataset.batch(self.meta_val_index)

	def stop_val_batch(self):
		return self.dataset.batch(self.stop_val_index) if len(self.stop_val_index) else None

	def test_batch(self):
		return self.dataset.batch(self.test_index)


@dataclass
class BilevelResult:
	params: ModelParams
	task_weights: TaskWeights
	log: TrainingLog
	hypergrads: list = field(default_factory=list)
	inner_steps: int = 0
	unobserved_tasks: tuple[int, ...] = ()


def _hidden_size(params: ModelParams) -> int:
	return params.encoder["w_hidden"].shape[0]


def bilevel_pretrain(
	problem,
	data: BilevelData,
	params: ModelParams,
	task_weights: TaskWeights,
	schedule: LoopSchedule,
	seed: int,
	learn_weights: bool = True,
	dynamics: DynamicsLog | None = None,
) -> BilevelResult:
	"""K outer steps of pretrain, lookahead finetune, hyper-gradient and weight update.

	Encoder and decoder continue from the previous outer step when
	``schedule.warm_start``; the lookahead classifier is drawn fresh each step
	when ``schedule.reinit_classifier``. The returned params hold the
	pretrained encoder and decoder.
	"""
	if len(task_weights) != problem.n_tasks:
		raise ConfigError(f"{len(task_weights)} task weights for {problem.n_tasks} tasks")
	pretrain_stream = data.pretrain_stream(schedule.batch_size, seed)
	train_stream = data.train_stream(schedule.batch_size, seed)
	meta_val = data.meta_val_batch()
	hidden = _hidden_size(params) if "w_hidden" in params.encoder else 0
	start = params
	log = TrainingLog(problem.n_tasks)
	hypergrads = []
	step_offset = 0
	unobserved = np.zeros(problem.n_tasks, dtype=bool)

	for k in range(schedule.n_outer):
		trace = InnerTrace() if learn_weights and schedule.hypergrad == "exact" else None
		try:
			pre = inner_pretrain(
				problem,
				params,
				task_weights.weights,
				schedule.pretrain_steps,
				schedule.pretrain_lr,
				pretrain_stream,
				trace=trace,
				per_task=learn_weights and schedule.contraction == "per_task",
				dynamics=dynamics,
				step_offset=step_offset,
				log_every=schedule.log_every,
			)
			lookahead = pre.params
			if schedule.reinit_classifier and hidden:
				lookahead = lookahead.with_block("classifier", init_classifier(hidden, seed, index=k + 1))
			tuned, _ = inner_finetune(
				problem, lookahead, schedule.finetune_steps, schedule.finetune_lr, train_stream, trace=trace
			)
		except DivergenceError as err:
			raise DivergenceError(f"outer step {k + 1}: {err}", partial_log=log) from err
		if pre.unobserved is not None:
			unobserved |= pre.unobserved
		step_offset += schedule.pretrain_steps + schedule.finetune_steps

		val_auc = validation_auc(problem, tuned, meta_val)
		if learn_weights:
			if trace is not None:
				hypergrad = exact_hypergrad(
					problem, trace, tuned, task_weights.weights, meta_val, schedule.pretrain_lr, schedule.finetune_lr
				)
			else:
				_, beta = value_and_grad(supervised_objective(problem, tuned, meta_val), tuned.arrays(*FINETUNE_BLOCKS))
				c = beta[: len(tuned.encoder)]
				hypergrad = first_order_hypergrad(pre.a, pre.b, c, schedule.contraction, pre.task_a)
			hypergrads.append(hypergrad)
			task_weights = update_lambda(task_weights, hypergrad.g, schedule.meta_lr)

		log.add(k + 1, pre.final_loss, val_auc, task_weights.weights)
		if dynamics is not None:
			dynamics.add(step_offset, "meta_val", "auc_roc", val_auc)
		logger.info(
			"outer step %d/%d: pretrain loss %.4f, meta-val AUC %.3f, max weight %.3f",
			k + 1,
			schedule.n_outer,
			pre.final_loss,
			val_auc,
			float(task_weights.weights.max()),
		)

		if schedule.warm_start:
			params = pre.params.with_block("classifier", tuned.classifier)
		else:
			params = start

	unobserved_tasks = tuple(int(f) for f in np.flatnonzero(unobserved))
	if unobserved_tasks:
		logger.warning("tasks with no observed target in a weight-update batch: %s", list(unobserved_tasks))
	return BilevelResult(pre.params, task_weights, log, hypergrads, step_offset, unobserved_tasks)


def final_finetune(
	problem,
	data: BilevelData,
	params: ModelParams,
	schedule: LoopSchedule,
	seed: int,
	dynamics: DynamicsLog | None = None,
	step_offset: int = 0,
	max_steps: int | None = None,
	purpose: str = "final_finetune",
	reinit_head: bool = True,
) -> tuple[ModelParams, int]:
	"""Early-stopped finetuning of encoder and head on the primary task, from a fresh head by default."""
	if reinit_head:
		params = params.with_block("classifier", init_classifier(_hidden_size(params), seed, index=0))
	if max_steps is None:
		max_steps = schedule.final_finetune_steps(len(data.train_index))
	return finetune_with_early_stopping(
		problem,
		params,
		max_steps,
		schedule.finetune_lr,
		data.train_stream(schedule.batch_size, seed, purpose),
		data.stop_val_batch(),
		check_every=schedule.early_stop_every,
		patience=schedule.patience,
		dynamics=dynamics,
		step_offset=step_offset,
	)


@dataclass
class AutoselectResult:
	params: ModelParams
	pretrained: ModelParams
	task_weights: TaskWeights
	log: TrainingLog
	finetune_steps: int
	unobserved_tasks: tuple[int, ...] = ()


def autoselect_train(
	problem,
	data: BilevelData,
	params: ModelParams,
	schedule: LoopSchedule,
	seed: int,
	task_weights: TaskWeights | None = None,
	dynamics: DynamicsLog | None = None,
) -> AutoselectResult:
	"""Learn task weights during pretraining, then finetune on the primary task alone."""
	if task_weights is None:
		task_weights = TaskWeights.uniform(problem.n_tasks)
	result = bilevel_pretrain(problem, data, params, task_weights, schedule, seed, dynamics=dynamics)
	tuned, steps = final_finetune(problem, data, result.params, schedule, seed, dynamics, result.inner_steps)
	top = np.argsort(-result.task_weights.weights, kind="stable")[:5]
	logger.info("final task weights, top tasks %s", ", ".join(f"{f}:{result.task_weights.weights[f]:.3f}" for f in top))
	return AutoselectResult(tuned, result.params, result.task_weights, result.log, steps, result.unobserved_tasks)

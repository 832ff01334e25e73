# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""The comparison arms. All of them start from ``init_params`` and share the
driver and the final finetune in ``metaselect``, so each reduction between
arms holds on the training log and the metrics row.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from autoselect.evalkit.dynamics import DynamicsLog
from autoselect.evalkit.metrics import auc_pr, auc_roc
from autoselect.exceptions import ConfigError, UndefinedMetricError
from autoselect.metaselect.autoselect import (
	BilevelData,
	TrainingLog,
	autoselect_train,
	bilevel_pretrain,
	final_finetune,
)
from autoselect.metaselect.loops import check_loss, finetune_with_early_stopping
from autoselect.metaselect.schedule import LoopSchedule
from autoselect.metaselect.weights import TaskWeights
from autoselect.numcore import ops
from autoselect.numcore.autodiff import value_and_grad
from autoselect.seqmodel.model import predict_proba
from autoselect.seqmodel.params import BLOCKS, ModelParams, bind, init_params

logger = logging.getLogger(__name__)

ARM_KINDS = ("supervised", "pretrain_all", "cotrain", "pretrain_top", "pretrain_down", "transfer", "autoselect")
ABLATION_MODES = ("top", "down")


@dataclass(frozen=True)
class ArmOptions:
	top_k: int = 20
	cotrain_target_weight: float = 10.0
	cotrain_aux_weight: float = 1.0
	cotrain_reinit_head: bool = False
	transfer_source: str = "trend"
	supervised_steps: int | None = None

	def __post_init__(self):
		if self.top_k < 1:
			raise ConfigError("top_k must be at least 1")
		if self.cotrain_target_weight < 0 or self.cotrain_aux_weight < 0:
			raise ConfigError("co-training loss weights must not be negative")
		if self.supervised_steps is not None and self.supervised_steps < 0:
			raise ConfigError("supervised_steps must not be negative")


@dataclass(frozen=True)
class ArmSpec:
	kind: str
	fraction: float = 1.0
	top_k: int = 20
	source_task: str | None = None

	def __post_init__(self):
		if self.kind not in ARM_KINDS:
			raise ConfigError(f"unknown arm {self.kind}; choose from {', '.join(ARM_KINDS)}")
		if not 0 < self.fraction <= 1:
			raise ConfigError(f"fraction must be in (0, 1], got {self.fraction}")
		if self.top_k < 1:
			raise ConfigError("top_k must be at least 1")


@dataclass
class ArmContext:
	"""Everything one arm needs for one (task, fold, fraction) cell."""

	problem: object
	data: BilevelData
	schedule: LoopSchedule
	seed: int
	hidden_size: int
	task: str
	fold: int
	fraction: float
	options: ArmOptions = field(default_factory=ArmOptions)

	def init(self) -> ModelParams:
		return init_params(self.problem.n_tasks, self.hidden_size, self.seed)


@dataclass
class ArmResult:
	arm: str
	metrics: dict
	params: ModelParams
	pretrained: ModelParams | None = None
	task_weights: TaskWeights | None = None
	log: TrainingLog | None = None
	dynamics: DynamicsLog = field(default_factory=DynamicsLog)
	unobserved_tasks: tuple[int, ...] = ()


def _safe(metric, scores, labels) -> float:
	try:
		return metric(scores, labels)
	except UndefinedMetricError:
		return float("nan")


def evaluate(ctx: ArmContext, params: ModelParams) -> tuple[float, float]:
	"""Test-set AUC-ROC and AUC-PR; NaN when the test labels have one class."""
	if len(ctx.data.test_index) == 0:
		return float("nan"), float("nan")
	batch = ctx.data.test_batch()
	scores = predict_proba(params, batch.values, ctx.problem.tau)
	return _safe(auc_roc, scores, batch.labels), _safe(auc_pr, scores, batch.labels)


def _result(ctx: ArmContext, arm: str, params: ModelParams, **kwargs) -> ArmResult:
	roc, pr = evaluate(ctx, params)
	metrics = {
		"arm": arm,
		"task": ctx.task,
		"fraction": ctx.fraction,
		"fold": ctx.fold,
		"auc_roc": roc,
		"auc_pr": pr,
		"sem": None,
	}
	logger.info("%s %s fold %d fraction %g: AUC-ROC %.3f AUC-PR %.3f", arm, ctx.task, ctx.fold, ctx.fraction, roc, pr)
	return ArmResult(arm, metrics, params, **kwargs)


def _supervised(ctx: ArmContext, arm: str) -> ArmResult:
	dynamics = DynamicsLog()
	max_steps = ctx.options.supervised_steps
	if max_steps is None:
		max_steps = ctx.schedule.budget
	params, _ = final_finetune(
		ctx.problem, ctx.data, ctx.init(), ctx.schedule, ctx.seed, dynamics, max_steps=max_steps, purpose="supervised"
	)
	return _result(ctx, arm, params, dynamics=dynamics)


def run_supervised(ctx: ArmContext, source: ArmResult | None = None) -> ArmResult:
	return _supervised(ctx, "supervised")


def _pretrain_then_finetune(ctx: ArmContext, arm: str, task_weights: TaskWeights) -> ArmResult:
	dynamics = DynamicsLog()
	pre = bilevel_pretrain(
		ctx.problem, ctx.data, ctx.init(), task_weights, ctx.schedule, ctx.seed, learn_weights=False, dynamics=dynamics
	)
	params, _ = final_finetune(ctx.problem, ctx.data, pre.params, ctx.schedule, ctx.seed, dynamics, pre.inner_steps)
	return _result(
		ctx,
		arm,
		params,
		pretrained=pre.params,
		task_weights=pre.task_weights,
		log=pre.log,
		dynamics=dynamics,
		unobserved_tasks=pre.unobserved_tasks,
	)


def run_pretrain_all(ctx: ArmContext, source: ArmResult | None = None) -> ArmResult:
	return _pretrain_then_finetune(ctx, "pretrain_all", TaskWeights.uniform(ctx.problem.n_tasks))


def run_autoselect(ctx: ArmContext, source: ArmResult | None = None) -> ArmResult:
	dynamics = DynamicsLog()
	result = autoselect_train(ctx.problem, ctx.data, ctx.init(), ctx.schedule, ctx.seed, dynamics=dynamics)
	return _result(
		ctx,
		"autoselect",
		result.params,
		pretrained=result.pretrained,
		task_weights=result.task_weights,
		log=result.log,
		dynamics=dynamics,
		unobserved_tasks=result.unobserved_tasks,
	)


def cotrain_objective(problem, params: ModelParams, weights, primary_batch, aux_batch, target_weight: float, aux_weight: float):
	"""target_weight * l^c + aux_weight * sum_f weights_f l_f over every block."""

	def objective(leaves):
		bound = bind(leaves, params, BLOCKS)
		supervised = problem.supervised_loss(bound["encoder"], bound["classifier"], primary_batch)
		auxiliary = ops.weighted_sum(weights, problem.pretrain_task_losses(bound["encoder"], bound["decoder"], aux_batch))
		return ops.add(ops.mul(supervised, target_weight), ops.mul(auxiliary, aux_weight))

	return objective


def run_cotrain(ctx: ArmContext, source: ArmResult | None = None) -> ArmResult:
	"""Joint training for the pretraining budget, then finetuning on the primary task alone.

	Each joint step draws one primary batch and one auxiliary batch. With a zero
	auxiliary weight the arm is supervised training on the same streams.
	"""
	schedule, options = ctx.schedule, ctx.options
	if options.cotrain_aux_weight == 0:
		logger.info("auxiliary weight is zero; co-training runs as supervised training")
		return _supervised(ctx, "cotrain")
	weights = TaskWeights.uniform(ctx.problem.n_tasks).weights
	aux_stream = ctx.data.pretrain_stream(schedule.batch_size, ctx.seed)
	primary_stream = ctx.data.train_stream(schedule.batch_size, ctx.seed, "cotrain_primary")
	dynamics = DynamicsLog()
	params = ctx.init()
	arrays = params.arrays(*BLOCKS)
	n_steps = schedule.n_outer * schedule.pretrain_steps
	for step in range(1, n_steps + 1):
		objective = cotrain_objective(
			ctx.problem,
			params,
			weights,
			primary_stream.next(),
			aux_stream.next(),
			options.cotrain_target_weight,
			options.cotrain_aux_weight,
		)
		loss, grads = value_and_grad(objective, arrays)
		check_loss(loss, step, "co-training")
		arrays = [x - schedule.pretrain_lr * g for x, g in zip(arrays, grads)]
		params = params.replace(BLOCKS, arrays)
		if step % schedule.log_every == 0:
			dynamics.add(step, "train", "cotrain_loss", loss)

	pretrained = params
	if options.cotrain_reinit_head:
		params, _ = final_finetune(ctx.problem, ctx.data, pretrained, schedule, ctx.seed, dynamics, n_steps)
	else:
		params, _ = finetune_with_early_stopping(
			ctx.problem,
			pretrained,
			schedule.final_finetune_steps(len(ctx.data.train_index)),
			schedule.finetune_lr,
			ctx.data.train_stream(schedule.batch_size, ctx.seed, "final_finetune"),
			ctx.data.stop_val_batch(),
			check_every=schedule.early_stop_every,
			patience=schedule.patience,
			dynamics=dynamics,
			step_offset=n_steps,
		)
	return _result(ctx, "cotrain", params, pretrained=pretrained, dynamics=dynamics)


def select_tasks(weights, mode: str, k: int) -> list[int]:
	"""Top-k tasks by weight, or their complement; ties go to the lower index."""
	weights = np.asarray(weights, dtype=np.float64)
	if mode not in ABLATION_MODES:
		raise ConfigError(f"ablation mode must be one of {ABLATION_MODES}")
	if k < 1:
		raise ConfigError("k must be at least 1")
	ranked = np.argsort(-weights, kind="stable")
	if mode == "top":
		return sorted(ranked[:k].tolist())
	if k >= weights.size:
		raise ConfigError(f"down mode with k={k} leaves no tasks out of {weights.size}")
	return sorted(ranked[k:].tolist())


def run_ablation(ctx: ArmContext, task_weights: TaskWeights, mode: str, k: int) -> ArmResult:
	tasks = select_tasks(task_weights.weights, mode, k)
	logger.info("pretrain (%s, k=%d) on tasks %s", mode, k, tasks)
	return _pretrain_then_finetune(ctx, f"pretrain_{mode}", TaskWeights.subset(ctx.problem.n_tasks, tasks))


def _source_weights(source: ArmResult | None) -> TaskWeights:
	if source is None or source.task_weights is None:
		raise ConfigError("ablations need the task weights of a finished autoselect run")
	return source.task_weights


def run_pretrain_top(ctx: ArmContext, source: ArmResult | None = None) -> ArmResult:
	return run_ablation(ctx, _source_weights(source), "top", ctx.options.top_k)


def run_pretrain_down(ctx: ArmContext, source: ArmResult | None = None) -> ArmResult:
	return run_ablation(ctx, _source_weights(source), "down", ctx.options.top_k)


def run_transfer(ctx: ArmContext, source: ArmResult | None = None) -> ArmResult:
	"""Reuse a source run's pretrained encoder and weights; finetune on this task only."""
	if source is None or source.pretrained is None:
		raise ConfigError("transfer needs a finished source autoselect run")
	width = source.pretrained.encoder["w_input"].shape[0]
	if width != ctx.problem.n_tasks:
		raise ConfigError(f"source encoder reads {width} features, target data has {ctx.problem.n_tasks}")
	dynamics = DynamicsLog()
	params, _ = final_finetune(ctx.problem, ctx.data, source.pretrained, ctx.schedule, ctx.seed, dynamics)
	return _result(ctx, "transfer", params, pretrained=source.pretrained, task_weights=source.task_weights, dynamics=dynamics)

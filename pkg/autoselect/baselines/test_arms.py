# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import dataclasses

import numpy as np
import pandas as pd
import pytest

from autoselect.baselines.arms import (
	ArmContext,
	ArmOptions,
	ArmSpec,
	cotrain_objective,
	run_ablation,
	run_autoselect,
	run_cotrain,
	run_pretrain_all,
	run_pretrain_down,
	run_pretrain_top,
	run_supervised,
	run_transfer,
	select_tasks,
)
from autoselect.baselines.folds import prepare_fold
from autoselect.datasynth.preprocess import Dataset
from autoselect.datasynth.records import WindowSpec
from autoselect.evalkit.splits import assign_splits
from autoselect.exceptions import ConfigError
from autoselect.metaselect.autoselect import BilevelData
from autoselect.metaselect.problem import SeqProblem
from autoselect.metaselect.weights import TaskWeights
from autoselect.numcore.autodiff import evaluate
from autoselect.numcore.rng import RngStream
from autoselect.seqmodel.params import BLOCKS


@pytest.fixture
def ctx(tiny_dataset, tiny_problem, tiny_schedule):
	splits = assign_splits(tiny_dataset.patient_ids, n_folds=2, proportions=(0.6, 0.2, 0.2))
	return ArmContext(
		problem=tiny_problem,
		data=prepare_fold(tiny_dataset, splits, 0),
		schedule=tiny_schedule,
		seed=0,
		hidden_size=3,
		task="primary",
		fold=0,
		fraction=1.0,
		options=ArmOptions(top_k=2),
	)


def _same_run(a, b):
	np.testing.assert_equal(
		{k: v for k, v in a.metrics.items() if k != "arm"}, {k: v for k, v in b.metrics.items() if k != "arm"}
	)
	for x, y in zip(a.params.arrays(*BLOCKS), b.params.arrays(*BLOCKS)):
		np.testing.assert_array_equal(x, y)


def test_every_arm_shares_one_architecture(ctx):
	auto = run_autoselect(ctx)
	results = [
		run_supervised(ctx),
		run_pretrain_all(ctx),
		run_cotrain(ctx),
		auto,
		run_pretrain_top(ctx, auto),
		run_pretrain_down(ctx, auto),
		run_transfer(ctx, auto),
	]
	shapes = {str(r.params.shapes()) for r in results}
	assert len(shapes) == 1
	assert [r.metrics["arm"] for r in results] == [
		"supervised",
		"pretrain_all",
		"cotrain",
		"autoselect",
		"pretrain_top",
		"pretrain_down",
		"transfer",
	]
	for result in results:
		assert set(result.metrics) == {"arm", "task", "fraction", "fold", "auc_roc", "auc_pr", "sem"}


def test_zero_meta_rate_autoselect_matches_pretrain_all(ctx):
	frozen = dataclasses.replace(ctx, schedule=dataclasses.replace(ctx.schedule, meta_lr=0.0))
	auto, baseline = run_autoselect(frozen), run_pretrain_all(frozen)
	assert auto.log.to_frame().equals(baseline.log.to_frame())
	_same_run(auto, baseline)


def test_top_mode_with_every_task_matches_pretrain_all(ctx):
	weights = TaskWeights(np.array([0.4, -0.1, 0.2, 0.0]))
	_same_run(run_ablation(ctx, weights, "top", 4), run_pretrain_all(ctx))


def test_down_mode_needs_leftover_tasks(ctx):
	with pytest.raises(ConfigError):
		run_ablation(ctx, TaskWeights.uniform(4), "down", 4)
	with pytest.raises(ConfigError):
		run_pretrain_top(ctx, None)


def test_ties_are_broken_by_task_index():
	weights = np.array([0.2, 0.3, 0.3, 0.2])
	assert select_tasks(weights, "top", 1) == [1]
	assert select_tasks(weights, "top", 3) == [0, 1, 2]
	assert select_tasks(weights, "down", 3) == [3]
	with pytest.raises(ConfigError):
		select_tasks(weights, "sideways", 1)


def test_transfer_onto_the_same_task_is_the_final_finetune(ctx):
	auto = run_autoselect(ctx)
	_same_run(run_transfer(ctx, auto), auto)


def test_transfer_rejects_a_different_feature_width(ctx):
	auto = run_autoselect(ctx)
	narrow = dataclasses.replace(ctx, problem=SeqProblem(3, ctx.problem.tau, ctx.problem.horizon))
	with pytest.raises(ConfigError):
		run_transfer(narrow, auto)


def test_cotrain_objective_is_the_weighted_sum(ctx):
	params = ctx.init()
	primary = ctx.data.dataset.batch(ctx.data.train_index[:6])
	aux = ctx.data.dataset.batch(ctx.data.pretrain_index[6:12], with_labels=False)
	weights = TaskWeights.uniform(4).weights
	arrays = params.arrays(*BLOCKS)
	joint = evaluate(cotrain_objective(ctx.problem, params, weights, primary, aux, 10.0, 1.0), arrays)
	supervised = evaluate(cotrain_objective(ctx.problem, params, weights, primary, aux, 1.0, 0.0), arrays)
	auxiliary = evaluate(cotrain_objective(ctx.problem, params, weights, primary, aux, 0.0, 1.0), arrays)
	assert joint == pytest.approx(10 * supervised + auxiliary, rel=1e-12)


def test_cotrain_without_target_loss_is_pretrain_all(ctx):
	options = ArmOptions(cotrain_target_weight=0.0, cotrain_reinit_head=True)
	cotrain = run_cotrain(dataclasses.replace(ctx, options=options))
	baseline = run_pretrain_all(ctx)
	_same_run(cotrain, baseline)


def test_cotrain_without_auxiliary_loss_is_supervised(ctx):
	cotrain = run_cotrain(dataclasses.replace(ctx, options=ArmOptions(cotrain_aux_weight=0.0)))
	assert cotrain.metrics["arm"] == "cotrain"
	_same_run(cotrain, run_supervised(ctx))


def test_supervised_with_no_steps_is_untrained(ctx):
	result = run_supervised(dataclasses.replace(ctx, options=ArmOptions(supervised_steps=0)))
	for x, y in zip(result.params.arrays(*BLOCKS), ctx.init().arrays(*BLOCKS)):
		np.testing.assert_array_equal(x, y)


def test_arm_spec_validation():
	assert ArmSpec("transfer", 0.01, source_task="trend").fraction == 0.01
	with pytest.raises(ConfigError):
		ArmSpec("pretrain_sideways")
	with pytest.raises(ConfigError):
		ArmSpec("supervised", fraction=0.0)


def _separable_data(n=120, steps=5, n_features=2, seed=0):
	rng = RngStream(seed, "separable").generator()
	labels = (np.arange(n) % 2).astype(np.float64)
	values = rng.normal(scale=0.2, size=(n, steps, n_features))
	values[:, :, 0] += np.where(labels == 1, 1.0, -1.0)[:, None]
	dataset = Dataset(
		values=values,
		mask=np.ones_like(values),
		labels=labels,
		patient_ids=[f"s{i:03d}" for i in range(n)],
		task="separable",
		window=WindowSpec(observation_hours=3, horizon_hours=2),
		stats=pd.DataFrame(),
		report=None,
	)
	order = np.arange(n)
	return BilevelData(dataset, order[:80], order[:80], order[80:90], order[90:100], order[100:])


def test_supervised_separates_separable_data(tiny_schedule):
	schedule = dataclasses.replace(tiny_schedule, finetune_lr=0.5, budget=200, batch_size=16, early_stop_every=20)
	ctx = ArmContext(SeqProblem(2, 3, 2), _separable_data(), schedule, 0, 4, "separable", 0, 1.0)
	assert run_supervised(ctx).metrics["auc_roc"] >= 0.95


def test_unobserved_channel_is_reported_by_the_weighted_arms(ctx, tiny_dataset):
	mask = tiny_dataset.mask.copy()
	mask[:, :, 2] = 0.0
	dataset = dataclasses.replace(tiny_dataset, mask=mask)
	splits = assign_splits(dataset.patient_ids, n_folds=2, proportions=(0.6, 0.2, 0.2))
	masked = dataclasses.replace(ctx, data=prepare_fold(dataset, splits, 0))

	auto = run_autoselect(masked)
	assert 2 in auto.unobserved_tasks
	assert 2 in run_pretrain_all(masked).unobserved_tasks
	assert np.isfinite(auto.task_weights.weights).all()
	assert run_supervised(masked).unobserved_tasks == ()

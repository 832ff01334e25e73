# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import numpy as np
import pytest

from autoselect.exceptions import ConfigError, DivergenceError
from autoselect.metaselect.fixtures import least_squares_fixture, seq_batch
from autoselect.metaselect.loops import (
	BatchStream,
	FixedStream,
	InnerTrace,
	finetune_with_early_stopping,
	inner_finetune,
	inner_pretrain,
	validation_auc,
)
from autoselect.metaselect.problem import SeqProblem
from autoselect.numcore.rng import RngStream
from autoselect.seqmodel.batch import SeqBatch
from autoselect.seqmodel.params import init_params


@pytest.fixture
def lls():
	return least_squares_fixture("loops", 1, 1)


def _residual(inputs, targets, w):
	return inputs.T @ (inputs @ w - targets) / inputs.shape[0]


def test_pretrain_needs_a_step(lls):
	with pytest.raises(ConfigError):
		inner_pretrain(lls.problem, lls.start, lls.weights.weights, 0, 0.1, FixedStream(lls.pretrain_batches))


def test_one_pretrain_step_is_plain_sgd(lls):
	lam = lls.weights.weights
	result = inner_pretrain(lls.problem, lls.start, lam, 1, 0.2, FixedStream(lls.pretrain_batches))
	w0 = lls.start.encoder["w"]
	expected = w0 - 0.2 * sum(weight * _residual(x, y, w0) for weight, (x, y) in zip(lam, lls.pretrain_batches[0]))
	np.testing.assert_allclose(result.params.encoder["w"], expected, rtol=1e-10)


def test_b_is_the_per_task_loss_at_the_final_iterate(lls):
	result = inner_pretrain(lls.problem, lls.start, lls.weights.weights, 3, 0.2, FixedStream(lls.pretrain_batches))
	w = result.params.encoder["w"]
	losses = [0.5 * np.mean((x @ w - y) ** 2) for x, y in lls.pretrain_batches[0]]
	np.testing.assert_allclose(result.b, losses, rtol=1e-10)
	np.testing.assert_allclose(
		result.a[0], sum(weight * _residual(x, y, w) for weight, (x, y) in zip(lls.weights.weights, lls.pretrain_batches[0])), rtol=1e-10
	)


def test_per_task_factors_sum_to_a(lls):
	lam = lls.weights.weights
	result = inner_pretrain(lls.problem, lls.start, lam, 2, 0.2, FixedStream(lls.pretrain_batches), per_task=True)
	np.testing.assert_allclose(lam @ result.task_a, result.a[0].ravel(), rtol=1e-10)


def test_trace_keeps_every_iterate(lls):
	trace = InnerTrace()
	inner_pretrain(lls.problem, lls.start, lls.weights.weights, 3, 0.2, FixedStream(lls.pretrain_batches), trace=trace)
	assert len(trace.pretrain_iterates) == 3
	np.testing.assert_array_equal(trace.pretrain_iterates[0][0], lls.start.encoder["w"])


def test_zero_learning_rate_finetune_changes_nothing(lls):
	params, _ = inner_finetune(lls.problem, lls.start, 4, 0.0, FixedStream(lls.finetune_batches))
	np.testing.assert_array_equal(params.encoder["w"], lls.start.encoder["w"])


def test_one_finetune_step_is_plain_sgd(lls):
	params, losses = inner_finetune(lls.problem, lls.start, 1, 0.3, FixedStream(lls.finetune_batches))
	x, y = lls.finetune_batches[0][0]
	w0 = lls.start.encoder["w"]
	np.testing.assert_allclose(params.encoder["w"], w0 - 0.3 * _residual(x, y, w0), rtol=1e-10)
	assert losses[0] == pytest.approx(0.5 * np.mean((x @ w0 - y) ** 2), rel=1e-10)


def _separable_batch(n=16, steps=5, n_features=2, seed=0):
	rng = RngStream(seed, "separable").generator()
	labels = (np.arange(n) % 2).astype(np.float64)
	values = rng.normal(scale=0.1, size=(n, steps, n_features))
	values[:, :, 0] += np.where(labels == 1, 1.0, -1.0)[:, None]
	return SeqBatch(values, np.ones_like(values), labels)


def test_finetune_loss_mostly_decreases_on_separable_data():
	problem = SeqProblem(2, 3, 2)
	batch = _separable_batch()
	_, losses = inner_finetune(problem, init_params(2, 4, 0), 30, 0.5, FixedStream([batch]))
	drops = np.sum(np.diff(losses) < 0)
	assert drops > len(losses) // 2
	assert losses[-1] < losses[0]


def test_early_stopping_keeps_the_best_checkpoint():
	problem = SeqProblem(2, 3, 2)
	batch = _separable_batch()
	best, steps = finetune_with_early_stopping(
		problem, init_params(2, 4, 0), 40, 0.5, FixedStream([batch]), batch, check_every=5, patience=2
	)
	assert steps <= 40
	assert validation_auc(problem, best, batch) >= validation_auc(problem, init_params(2, 4, 0), batch)


def test_divergence_is_reported(lls):
	with pytest.raises(DivergenceError):
		inner_finetune(lls.problem, lls.start, 200, 50.0, FixedStream(lls.finetune_batches))


def test_batch_stream_is_seeded_and_covers_each_epoch():
	def sample(seed):
		stream = BatchStream(np.arange(10), 4, RngStream(seed, "batches"), lambda index: index)
		return [stream.next() for _ in range(5)]

	first, again = sample(1), sample(1)
	assert all(np.array_equal(a, b) for a, b in zip(first, again))
	assert not all(np.array_equal(a, b) for a, b in zip(first, sample(2)))
	assert len(set(np.concatenate(first[:2]))) == 8


def test_batch_stream_rejects_empty_index():
	with pytest.raises(ConfigError):
		BatchStream([], 4, RngStream(0, "batches"), lambda index: index)


def test_seq_batches_feed_the_pretraining_loop():
	problem = SeqProblem(3, 2, 2)
	rng = RngStream(0, "loops").generator()
	batch = seq_batch(rng, 4, 4, 3)
	result = inner_pretrain(problem, init_params(3, 3, 0), np.full(3, 1 / 3), 5, 0.1, FixedStream([batch]))
	assert result.losses[-1] < result.losses[0]
	assert result.b.shape == (3,)
	assert len(result.a) == 3
	mse, unobserved = problem.task_mse(result.params.encoder, result.params.decoder, batch)
	np.testing.assert_allclose(result.b, mse, rtol=1e-10)
	assert not result.unobserved.any() and not unobserved.any()

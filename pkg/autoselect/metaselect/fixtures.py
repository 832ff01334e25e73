# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Tiny problems with known-good gradients, shared by ``cmd_check`` and the tests.

The least-squares problem has a closed-form hyper-gradient for one
pretraining and one finetuning step. With losses l(w) = |X w - y|^2 / (2m),
M = X'X / m and q = X'y / m:

    w1 = w0 - eta_p * sum_f lambda_f (M_f w0 - q_f)
    w2 = w1 - eta_c (M_c w1 - q_c)
    g_f = -eta_p * [(I - eta_c M_c)(M_v w2 - q_v)] . (M_f w0 - q_f)
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from autoselect.exceptions import ConfigError
from autoselect.metaselect.hypergrad import exact_hypergrad, fd_hypergrad, unrolled_validation_loss
from autoselect.metaselect.loops import FixedStream, InnerTrace, inner_finetune, inner_pretrain
from autoselect.metaselect.problem import SeqProblem
from autoselect.metaselect.weights import TaskWeights
from autoselect.numcore import ops
from autoselect.numcore.autodiff import fd_grad, grad, relative_error
from autoselect.numcore.rng import RngStream
from autoselect.seqmodel.batch import SeqBatch
from autoselect.seqmodel.model import classification_loss, classify, forecast, pretrain_loss
from autoselect.seqmodel.params import ModelParams, bind, init_params

logger = logging.getLogger(__name__)

GRAD_TOLERANCE = 1e-4
HYPERGRAD_TOLERANCE = 3e-3
HYPERGRAD_FLOOR = 1e-6
# A hyper-gradient fixture must clear the floor by this factor to count.
SIGNAL_RATIO = 100.0
CLOSED_FORM_TOLERANCE = 1e-6
FAULT_SCALE = 1.01


class LeastSquaresProblem:
	"""Linear regression heads sharing one weight vector w [n, 1].

	Batches are lists of (X, y) pairs: one per task for pretraining, a single
	pair for the supervised loss. There is no decoder or classifier block.
	"""

	def __init__(self, n_tasks: int):
		self.n_tasks = n_tasks

	@staticmethod
	def _loss(w, inputs, targets):
		return ops.mul(ops.mean(ops.square(ops.sub(ops.matmul(inputs, w), targets))), 0.5)

	def pretrain_task_losses(self, encoder, decoder, batch):
		return ops.stack([self._loss(encoder["w"], inputs, targets) for inputs, targets in batch])

	def task_mse(self, encoder, decoder, batch):
		w = np.asarray(encoder["w"])
		mse = np.array([np.mean((inputs @ w - targets) ** 2) for inputs, targets in batch])
		return mse, np.zeros(self.n_tasks, dtype=bool)

	def supervised_loss(self, encoder, classifier, batch):
		(inputs, targets) = batch[0]
		return self._loss(encoder["w"], inputs, targets)

	def score(self, encoder, classifier, batch):
		inputs, _ = batch[0]
		return (inputs @ np.asarray(encoder["w"])).ravel()


def _moments(inputs, targets):
	m = inputs.shape[0]
	return inputs.T @ inputs / m, inputs.T @ targets / m


def least_squares_closed_form(task_batch, train_batch, val_batch, w0, weights, pretrain_lr, finetune_lr):
	moments = [_moments(x, y) for x, y in task_batch]
	m_c, q_c = _moments(*train_batch[0])
	m_v, q_v = _moments(*val_batch[0])
	residuals = [m_f @ w0 - q_f for m_f, q_f in moments]
	w1 = w0 - pretrain_lr * sum(lam * r for lam, r in zip(weights, residuals))
	w2 = w1 - finetune_lr * (m_c @ w1 - q_c)
	back = (np.eye(w0.shape[0]) - finetune_lr * m_c) @ (m_v @ w2 - q_v)
	return np.array([-pretrain_lr * (back.T @ r).item() for r in residuals])


@dataclass
class HyperFixture:
	name: str
	problem: object
	start: ModelParams
	weights: TaskWeights
	pretrain_batches: list
	finetune_batches: list
	val_batch: object
	pretrain_lr: float
	finetune_lr: float
	closed_form: Callable | None = None
	swap: tuple[int, int] | None = None


@dataclass
class OracleResult:
	fixture: str
	check: str
	max_rel_error: float
	max_abs_error: float
	tolerance: float
	passed: bool
	details: dict = field(default_factory=dict)


def agreement(a, b, rel: float, floor: float = 0.0) -> bool:
	a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
	return bool(np.all(np.abs(a - b) <= np.maximum(rel * np.maximum(np.abs(a), np.abs(b)), floor)))


def _max_abs(a, b) -> float:
	if isinstance(a, (list, tuple)):
		return max((_max_abs(x, y) for x, y in zip(a, b)), default=0.0)
	return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if np.size(a) else 0.0


def least_squares_fixture(name: str, n_pretrain: int, n_finetune: int, seed: int = 11) -> HyperFixture:
	rng = RngStream(seed, "fixture_" + name).generator()
	n_tasks, dim, rows = 3, 3, 8

	def pair():
		return rng.normal(size=(rows, dim)), rng.normal(size=(rows, 1))

	task_batch = [pair() for _ in range(n_tasks)]
	train_batch, val_batch = [pair()], [pair()]
	start = ModelParams(encoder={"w": rng.normal(scale=0.5, size=(dim, 1))}, decoder={}, classifier={})
	weights = TaskWeights(np.array([0.3, -0.2, 0.1]))
	closed_form = None
	if n_pretrain == 1 and n_finetune == 1:

		def closed_form(lam):
			return least_squares_closed_form(
				task_batch, train_batch, val_batch, start.encoder["w"], lam, 0.2, 0.3
			)

	return HyperFixture(
		name=name,
		problem=LeastSquaresProblem(n_tasks),
		start=start,
		weights=weights,
		pretrain_batches=[task_batch] * n_pretrain,
		finetune_batches=[train_batch] * n_finetune,
		val_batch=val_batch,
		pretrain_lr=0.2,
		finetune_lr=0.3,
		closed_form=closed_form,
	)


def seq_batch(
	rng,
	batch_size: int,
	steps: int,
	n_features: int,
	duplicate: tuple[int, int] | None = None,
	label_step: int | None = None,
) -> SeqBatch:
	"""Random batch; labels alternate, or split channel 0 at ``label_step`` by its median."""
	values = rng.normal(size=(batch_size, steps, n_features))
	mask = (rng.uniform(size=values.shape) < 0.8).astype(np.float64)
	if duplicate is not None:
		i, j = duplicate
		values[..., j] = values[..., i]
		mask[..., j] = mask[..., i]
	if label_step is None:
		labels = np.arange(batch_size) % 2 == 0
	else:
		signal = values[:, label_step, 0]
		labels = signal > np.median(signal)
	return SeqBatch(values, mask, labels.astype(np.float64))


def symmetrize(params: ModelParams, i: int, j: int) -> ModelParams:
	"""Make channels i and j interchangeable in every block."""
	params = params.copy()
	params.encoder["w_input"][j] = params.encoder["w_input"][i]
	params.decoder["w_input"][j] = params.decoder["w_input"][i]
	params.decoder["w_out"][:, j] = params.decoder["w_out"][:, i]
	params.decoder["b_out"][j] = params.decoder["b_out"][i]
	return params


def sharpen_heads(params: ModelParams, classifier_scale: float = 4.0, readout_scale: float = 2.0) -> ModelParams:
	"""Scale the classifier and decoder readout up from their init, so the
	validation loss responds to the task weights well above the oracle floor."""
	decoder = dict(params.decoder, w_out=params.decoder["w_out"] * readout_scale)
	classifier = dict(params.classifier, weight=params.classifier["weight"] * classifier_scale)
	return params.with_block("decoder", decoder).with_block("classifier", classifier)


def seq_fixture(
	name: str,
	n_features: int,
	hidden: int,
	n_pretrain: int,
	n_finetune: int,
	seed: int,
	duplicate: tuple[int, int] | None = None,
) -> HyperFixture:
	tau, horizon, batch_size = 2, 2, 4
	rng = RngStream(seed, "fixture_" + name).generator()
	start = sharpen_heads(init_params(n_features, hidden, seed))
	logits = rng.normal(scale=0.5, size=n_features)
	if duplicate is not None:
		start = symmetrize(start, *duplicate)
		logits[duplicate[1]] = logits[duplicate[0]]

	def make():
		return seq_batch(rng, batch_size, tau + horizon, n_features, duplicate, label_step=tau - 1)

	return HyperFixture(
		name=name,
		problem=SeqProblem(n_features, tau, horizon),
		start=start,
		weights=TaskWeights(logits),
		pretrain_batches=[make() for _ in range(n_pretrain)],
		finetune_batches=[make() for _ in range(n_finetune)],
		val_batch=make(),
		pretrain_lr=1.0,
		finetune_lr=0.5,
		swap=duplicate,
	)


def hyper_fixtures() -> list[HyperFixture]:
	return [
		least_squares_fixture("lls_closed_form", 1, 1),
		least_squares_fixture("lls_unrolled", 4, 3),
		seq_fixture("seq_tiny", n_features=2, hidden=3, n_pretrain=3, n_finetune=2, seed=1),
		seq_fixture("seq_long_pretrain", n_features=3, hidden=3, n_pretrain=4, n_finetune=1, seed=2),
		seq_fixture("seq_long_finetune", n_features=2, hidden=2, n_pretrain=2, n_finetune=4, seed=3),
		seq_fixture("seq_duplicate_tasks", n_features=3, hidden=3, n_pretrain=3, n_finetune=2, seed=4, duplicate=(0, 1)),
	]


def record_trace(fixture: HyperFixture) -> tuple[InnerTrace, ModelParams]:
	"""Run the fixture's inner loops once, keeping every iterate."""
	trace = InnerTrace()
	pre = inner_pretrain(
		fixture.problem,
		fixture.start,
		fixture.weights.weights,
		len(fixture.pretrain_batches),
		fixture.pretrain_lr,
		FixedStream(fixture.pretrain_batches),
		trace=trace,
	)
	params = pre.params.with_block("classifier", fixture.start.classifier)
	finetuned, _ = inner_finetune(
		fixture.problem,
		params,
		len(fixture.finetune_batches),
		fixture.finetune_lr,
		FixedStream(fixture.finetune_batches),
		trace=trace,
	)
	return trace, finetuned


def check_hyper_fixture(fixture: HyperFixture, inject_fault: bool = False) -> list[OracleResult]:
	trace, finetuned = record_trace(fixture)
	lam = fixture.weights.weights
	args = (fixture.problem, trace, finetuned, lam, fixture.val_batch, fixture.pretrain_lr, fixture.finetune_lr)
	exact = exact_hypergrad(*args)
	if inject_fault:
		exact.g = exact.g * FAULT_SCALE
	closure = unrolled_validation_loss(
		fixture.problem, fixture.start, trace, fixture.val_batch, fixture.pretrain_lr, fixture.finetune_lr
	)
	numeric = fd_hypergrad(closure, fixture.weights.logits)

	analytic_logit = exact.logit_gradient(lam)
	numeric_logit = numeric.logit_gradient(lam)
	literal = exact_hypergrad(*args, encoder_only=True).logit_gradient(lam)
	signal = float(np.abs(numeric_logit).max())
	results = [
		OracleResult(
			fixture.name,
			"exact vs finite difference",
			relative_error(analytic_logit, numeric_logit),
			_max_abs(analytic_logit, numeric_logit),
			HYPERGRAD_TOLERANCE,
			agreement(analytic_logit, numeric_logit, HYPERGRAD_TOLERANCE, HYPERGRAD_FLOOR)
			and signal >= SIGNAL_RATIO * HYPERGRAD_FLOOR,
			{"encoder_only_rel_error": relative_error(literal, numeric_logit), "max_abs_gradient": signal},
		)
	]
	if fixture.closed_form is not None:
		expected = fixture.closed_form(lam)
		results.append(
			OracleResult(
				fixture.name,
				"exact vs closed form",
				relative_error(exact.g, expected),
				_max_abs(exact.g, expected),
				CLOSED_FORM_TOLERANCE,
				agreement(exact.g, expected, CLOSED_FORM_TOLERANCE, 1e-10),
			)
		)
	if fixture.swap is not None:
		i, j = fixture.swap
		results.append(
			OracleResult(
				fixture.name,
				"task swap symmetry",
				relative_error(analytic_logit[i], analytic_logit[j]),
				_max_abs(analytic_logit[i], analytic_logit[j]),
				1e-6,
				agreement(analytic_logit[i], analytic_logit[j], 1e-6, 1e-9),
			)
		)
	return results


def _grad_case(name: str, seed: int):
	rng = RngStream(seed, "fixture_" + name).generator()
	problem_tau, horizon = 3, 2
	params = init_params(3, 4, seed)
	batch = seq_batch(rng, 4, problem_tau + horizon, 3)
	if name == "grad_pretrain_loss":
		weights = np.array([0.5, 0.3, 0.2])
		targets, mask = batch.targets(problem_tau, horizon)
		blocks = ("encoder", "decoder")

		def objective(leaves):
			bound = bind(leaves, params, blocks)
			out = forecast(bound["encoder"], bound["decoder"], batch, problem_tau, horizon)
			return pretrain_loss(weights, out, targets, mask)

	else:
		blocks = ("encoder", "classifier")

		def objective(leaves):
			bound = bind(leaves, params, blocks)
			return classification_loss(classify(bound["encoder"], bound["classifier"], batch.values, problem_tau), batch.labels)

	return objective, params.arrays(*blocks)


GRAD_FIXTURES = ("grad_pretrain_loss", "grad_classification_loss")
GRAD_SEED = 5


def check_grad_fixture(name: str, inject_fault: bool = False, seed: int = GRAD_SEED) -> OracleResult:
	objective, arrays = _grad_case(name, seed)
	analytic = grad(objective, arrays)
	if inject_fault:
		analytic = [g * FAULT_SCALE for g in analytic]
	numeric = fd_grad(objective, arrays)
	passed = all(agreement(a, n, GRAD_TOLERANCE, 1e-9) for a, n in zip(analytic, numeric))
	return OracleResult(
		name,
		"autodiff vs finite difference",
		relative_error(analytic, numeric),
		_max_abs(analytic, numeric),
		GRAD_TOLERANCE,
		passed,
	)


def fixture_names() -> list[str]:
	return list(GRAD_FIXTURES) + [fixture.name for fixture in hyper_fixtures()]


def run_oracles(inject_fault: str | None = None, grad_seed: int = GRAD_SEED) -> list[OracleResult]:
	"""Every gradient and hyper-gradient oracle; ``inject_fault`` corrupts one fixture.

	``grad_seed`` redraws the gradient fixtures. The hyper-gradient fixtures keep
	their own seeds.
	"""
	names = fixture_names()
	if inject_fault is not None and inject_fault not in names:
		raise ConfigError(f"unknown fixture {inject_fault}; choose from {', '.join(names)}")

	results = [check_grad_fixture(name, inject_fault == name, grad_seed) for name in GRAD_FIXTURES]
	for fixture in hyper_fixtures():
		results.extend(check_hyper_fixture(fixture, inject_fault == fixture.name))
	for result in results:
		log = logger.info if result.passed else logger.error
		log("%s / %s: max rel error %.2e", result.fixture, result.check, result.max_rel_error)
	return results

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Sequence-to-sequence forecaster and classifier head.

The encoder and decoder are single-layer LSTM cells (gate layout in
``numcore.ops.lstm_step``). The decoder starts from the encoder state with a
zero cell, takes the last observed input vector as its first input and feeds
its own prediction back afterwards. One shared decoder cell produces all F
channels through an F-wide linear readout.

Every function takes parameter blocks as name -> Node (or plain array) maps,
so the same code runs on a tape for training and without one for prediction.
"""

import logging

import numpy as np

from autoselect.numcore import ops
from autoselect.numcore.ops import lift, tape_of
from autoselect.numcore.tape import Node
from autoselect.numcore.tensor import Tensor
from autoselect.seqmodel.batch import SeqBatch
from autoselect.seqmodel.params import ModelParams, on_tape

logger = logging.getLogger(__name__)

PROB_CLAMP = 1e-7


def encode(encoder: dict, values, tau: int) -> Node:
	"""s_tau [B, d] from the first ``tau`` steps of ``values`` [B, T, F]."""
	values = np.asarray(values, dtype=np.float64)
	if not 1 <= tau <= values.shape[1]:
		raise ValueError(f"tau={tau} outside 1..{values.shape[1]}")
	tape = tape_of(*encoder.values())
	enc = on_tape(encoder, tape)
	batch_size = values.shape[0]
	hidden = enc["w_hidden"].shape[0]
	h = tape.constant(np.zeros((batch_size, hidden)))
	c = tape.constant(np.zeros((batch_size, hidden)))
	for t in range(tau):
		h, c = ops.lstm_step(values[:, t, :], h, c, enc["w_input"], enc["w_hidden"], enc["bias"])
	return h


def decode(decoder: dict, state, horizon: int, first_input) -> Node:
	"""Autoregressive rollout x_hat [B, H, F]."""
	if horizon < 1:
		raise ValueError("forecast horizon must be at least 1")
	tape = tape_of(state, *decoder.values())
	dec = on_tape(decoder, tape)
	h = lift(state, tape)
	c = tape.constant(np.zeros(h.shape))
	step_input = lift(first_input, tape)
	outputs = []
	for _ in range(horizon):
		h, c = ops.lstm_step(step_input, h, c, dec["w_input"], dec["w_hidden"], dec["bias"])
		step_input = ops.affine(h, dec["w_out"], dec["b_out"])
		outputs.append(step_input)
	return ops.stack(outputs, axis=1)


def forecast(encoder: dict, decoder: dict, batch: SeqBatch, tau: int, horizon: int) -> Node:
	state = encode(encoder, batch.values, tau)
	return decode(decoder, state, horizon, batch.last_observed(tau))


def task_losses(forecast_node, targets, mask) -> Node:
	"""Per-task masked mean squared error [F]."""
	targets = np.asarray(targets, dtype=np.float64)
	mask = np.asarray(mask, dtype=np.float64)
	counts = np.maximum(1.0, mask.sum(axis=(0, 1)))
	squared = ops.mul(ops.square(ops.sub(forecast_node, targets)), mask)
	return ops.mul(ops.reduce_sum(squared, axis=(0, 1)), 1.0 / counts)


def pretrain_loss(weights, forecast_node, targets, mask) -> Node:
	"""sum_f weights_f * masked MSE_f; an all-masked task contributes 0."""
	return ops.weighted_sum(weights, task_losses(forecast_node, targets, mask))


def per_task_mse(forecast_values, targets, mask) -> tuple[Tensor, np.ndarray]:
	"""Tape-free per-task MSE plus a flag for tasks with no observed target."""
	forecast_values = np.asarray(forecast_values, dtype=np.float64)
	mask = np.asarray(mask, dtype=np.float64)
	observed = mask.sum(axis=(0, 1))
	squared = mask * (forecast_values - targets) ** 2
	mse = squared.sum(axis=(0, 1)) / np.maximum(1.0, observed)
	all_masked = observed == 0
	if all_masked.any():
		logger.warning("tasks with no observed target cells: %s", np.flatnonzero(all_masked).tolist())
	return mse, all_masked


def classify(encoder: dict, classifier: dict, values, tau: int) -> Node:
	"""p = sigmoid(s_tau @ weight + bias), shape [B]."""
	tape = tape_of(*encoder.values(), *classifier.values())
	enc = on_tape(encoder, tape)
	clf = on_tape(classifier, tape)
	state = encode(enc, values, tau)
	logits = ops.affine(state, clf["weight"], clf["bias"])
	return ops.sigmoid(ops.reshape(logits, (state.shape[0],)))


def classification_loss(probabilities, labels) -> Node:
	"""Mean negative log-likelihood with p clamped to [1e-7, 1 - 1e-7]."""
	labels = np.asarray(labels, dtype=np.float64)
	if not np.all((labels == 0) | (labels == 1)):
		raise ValueError("labels must be 0 or 1")
	tape = tape_of(probabilities)
	p = ops.clip(lift(probabilities, tape), PROB_CLAMP, 1.0 - PROB_CLAMP)
	log_likelihood = ops.add(ops.mul(labels, ops.log(p)), ops.mul(1.0 - labels, ops.log(ops.sub(1.0, p))))
	return ops.neg(ops.mean(log_likelihood))


def predict_proba(params: ModelParams, values, tau: int, batch_size: int = 512) -> Tensor:
	values = np.asarray(values, dtype=np.float64)
	chunks = [
		classify(params.encoder, params.classifier, values[start : start + batch_size], tau).value
		for start in range(0, values.shape[0], batch_size)
	]
	return np.concatenate(chunks) if chunks else np.zeros(0)

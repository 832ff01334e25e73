# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import numpy as np
from scipy.stats import rankdata

from autoselect.exceptions import UndefinedMetricError


def _binary(scores, labels) -> tuple[np.ndarray, np.ndarray]:
	scores = np.asarray(scores, dtype=np.float64).ravel()
	labels = np.asarray(labels, dtype=np.float64).ravel()
	if scores.shape != labels.shape:
		raise ValueError(f"{scores.size} scores for {labels.size} labels")
	if not np.all((labels == 0) | (labels == 1)):
		raise ValueError("labels must be 0 or 1")
	return scores, labels


def auc_roc(scores, labels) -> float:
	"""Mann-Whitney AUC: P(random positive outranks random negative), ties count 1/2."""
	scores, labels = _binary(scores, labels)
	positive = labels == 1
	n_pos = int(positive.sum())
	n_neg = labels.size - n_pos
	if n_pos == 0 or n_neg == 0:
		raise UndefinedMetricError("AUC-ROC needs both classes")
	ranks = rankdata(scores)
	return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def auc_pr(scores, labels) -> float:
	"""Average precision with step-wise recall increments, no interpolation.

	Tied scores form one threshold.
	"""
	scores, labels = _binary(scores, labels)
	if not labels.any():
		raise UndefinedMetricError("AUC-PR needs at least one positive")
	order = np.argsort(-scores, kind="mergesort")
	scores, labels = scores[order], labels[order]
	last_of_threshold = np.r_[np.flatnonzero(np.diff(scores)), scores.size - 1]
	true_pos = np.cumsum(labels)[last_of_threshold]
	predicted = last_of_threshold + 1.0
	precision = true_pos / predicted
	recall = true_pos / true_pos[-1]
	return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import math
from dataclasses import dataclass

import numpy as np


def format_cell(mean: float, sem: float | None = None) -> str:
	if sem is None:
		return f"{mean:.3f}"
	return f"{mean:.3f} ({sem:.3f})"


@dataclass(frozen=True)
class MetricSummary:
	values: tuple[float, ...]
	mean: float
	sem: float | None

	@property
	def cell(self) -> str:
		return format_cell(self.mean, self.sem)


def summarize(values) -> MetricSummary:
	"""Mean and standard error (sample std / sqrt(n)); sem is None below two folds."""
	values = tuple(float(v) for v in values)
	if not values:
		raise ValueError("nothing to summarize")
	arr = np.asarray(values)
	if arr.size < 2:
		sem = None
	elif np.ptp(arr) == 0:
		sem = 0.0
	else:
		sem = float(arr.std(ddof=1) / math.sqrt(arr.size))
	return MetricSummary(values, float(arr.mean()), sem)

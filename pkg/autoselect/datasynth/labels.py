# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from dataclasses import dataclass

import numpy as np
import pandas as pd

from autoselect.datasynth.records import EXCLUDED, NEGATIVE, POSITIVE, Cohort, WindowSpec
from autoselect.exceptions import ConfigError


@dataclass(frozen=True)
class Criterion:
	"""Fires at the first event where feature ``feature_id`` crosses ``threshold``.

	``onsets`` (patient_id -> hour) replaces the threshold rule for outcomes
	recorded as explicit event times.
	"""

	feature_id: int | None = None
	threshold: float | None = None
	direction: str = "ge"
	onsets: dict[str, float] | None = None

	def __post_init__(self):
		if self.onsets is None and (self.feature_id is None or self.threshold is None):
			raise ConfigError("criterion needs feature_id and threshold, or onsets")
		if self.direction not in ("ge", "le"):
			raise ConfigError(f"criterion direction must be ge or le, got {self.direction}")

	def first_firing(self, events: pd.DataFrame) -> pd.Series:
		if self.onsets is not None:
			return pd.Series(self.onsets, dtype=np.float64)
		rows = events[events["feature_id"] == self.feature_id]
		values = rows["value"]
		fired = rows[values >= self.threshold] if self.direction == "ge" else rows[values <= self.threshold]
		return fired.groupby("patient_id")["time_hours"].min()


def make_labels(cohort: Cohort, criterion: Criterion, window: WindowSpec) -> pd.Series:
	"""Label per patient.

	Excluded when the record is shorter than the observation window or the
	criterion fires before the label window opens; positive when it fires
	inside the label window; negative otherwise.
	"""
	firing = criterion.first_firing(cohort.events)
	labels = {}
	for pid, length in cohort.lengths.items():
		when = firing.get(pid, np.nan)
		if length < window.observation_hours or when < window.label_start:
			labels[pid] = EXCLUDED
		elif window.label_start <= when < window.label_end:
			labels[pid] = POSITIVE
		else:
			labels[pid] = NEGATIVE
	return pd.Series(labels, name="label", dtype=np.int64).sort_index()


def label_counts(labels: pd.Series) -> dict[str, int]:
	return {
		"positive": int((labels == POSITIVE).sum()),
		"negative": int((labels == NEGATIVE).sum()),
		"excluded": int((labels == EXCLUDED).sum()),
	}

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from dataclasses import dataclass

import pandas as pd

from autoselect.exceptions import ConfigError

EVENT_COLUMNS = ["patient_id", "time_hours", "feature_id", "value"]
LABEL_COLUMNS = ["patient_id", "task", "label"]

POSITIVE = 1
NEGATIVE = 0
EXCLUDED = -1


@dataclass(frozen=True)
class WindowSpec:
	"""Windows in hours; one grid step is one hour.

	The observation window is [0, observation_hours); the forecast horizon
	follows it directly. Labels look at
	[observation_hours + gap_hours, observation_hours + gap_hours + label_hours).
	"""

	observation_hours: int = 48
	horizon_hours: int = 8
	gap_hours: int = 0
	label_hours: int = 48
	max_lookback_hours: int | None = None

	def __post_init__(self):
		for name in ("observation_hours", "horizon_hours", "label_hours"):
			if getattr(self, name) < 1:
				raise ConfigError(f"{name} must be positive")
		if self.gap_hours < 0:
			raise ConfigError("gap_hours must not be negative")
		if self.max_lookback_hours is not None and self.max_lookback_hours < 1:
			raise ConfigError("max_lookback_hours must be positive")

	@property
	def tau(self) -> int:
		return self.observation_hours

	@property
	def grid_steps(self) -> int:
		return self.observation_hours + self.horizon_hours

	@property
	def lookback(self) -> int:
		return self.observation_hours if self.max_lookback_hours is None else self.max_lookback_hours

	@property
	def label_start(self) -> int:
		return self.observation_hours + self.gap_hours

	@property
	def label_end(self) -> int:
		return self.label_start + self.label_hours


@dataclass
class Cohort:
	"""Long-format events plus per-task labels.

	``labels`` holds POSITIVE/NEGATIVE/EXCLUDED codes; ``manifest`` is set
	only for generated cohorts.
	"""

	events: pd.DataFrame
	labels: pd.DataFrame
	n_features: int
	lengths: pd.Series
	manifest: dict | None = None

	def __post_init__(self):
		if len(self.events):
			if (self.events["time_hours"] < 0).any():
				raise ConfigError("event times must be non-negative")
			if (self.events["feature_id"] >= self.n_features).any() or (self.events["feature_id"] < 0).any():
				raise ConfigError(f"feature_id outside 0..{self.n_features - 1}")

	@property
	def patient_ids(self) -> list[str]:
		return sorted(self.lengths.index)

	@property
	def tasks(self) -> list[str]:
		return sorted(self.labels["task"].unique())

	def task_labels(self, task: str) -> pd.Series:
		rows = self.labels[self.labels["task"] == task]
		if rows.empty:
			raise ConfigError(f"cohort has no labels for task {task}")
		return rows.set_index("patient_id")["label"].sort_index()

	def with_labels(self, task: str, labels: pd.Series) -> "Cohort":
		rows = pd.DataFrame({"patient_id": labels.index, "task": task, "label": labels.to_numpy()})
		kept = self.labels[self.labels["task"] != task]
		merged = pd.concat([kept, rows], ignore_index=True).sort_values(["task", "patient_id"], ignore_index=True)
		return Cohort(self.events, merged, self.n_features, self.lengths, self.manifest)

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Outlier removal, z-scoring and hourly bucketing with LOCF.

Percentiles use linear interpolation between order statistics and the
standard deviation is the population one (ddof=0).
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from autoselect.datasynth.records import EXCLUDED, Cohort, WindowSpec
from autoselect.exceptions import ConfigError
from autoselect.seqmodel.batch import SeqBatch

logger = logging.getLogger(__name__)

LOW_FACTOR = 0.1
HIGH_FACTOR = 10.0


@dataclass
class OutlierReport:
	dropped: int = 0
	dropped_by_feature: dict[int, int] = field(default_factory=dict)
	skipped: dict[int, str] = field(default_factory=dict)


@dataclass
class PreprocessReport:
	outliers: OutlierReport
	n_patients: int = 0
	n_excluded: int = 0
	n_lookback_dropped: int = 0


def feature_percentiles(events: pd.DataFrame) -> pd.DataFrame:
	"""p1, p99 and count per feature over the raw events."""
	rows = {}
	for feature_id, values in events.groupby("feature_id")["value"]:
		arr = values.to_numpy(dtype=np.float64)
		p1, p99 = np.percentile(arr, [1, 99])
		rows[int(feature_id)] = {"p1": p1, "p99": p99, "count": arr.size}
	table = pd.DataFrame.from_dict(rows, orient="index", columns=["p1", "p99", "count"])
	table.index.name = "feature_id"
	return table


def remove_outliers(
	events: pd.DataFrame, percentiles: pd.DataFrame, n_features: int | None = None
) -> tuple[pd.DataFrame, OutlierReport]:
	"""Drop values outside [0.1 * p1, 10 * p99] feature by feature.

	Features with fewer than two values, or with p1 <= 0 where the rule has no
	meaning, pass through unfiltered and are listed in the report.
	"""
	report = OutlierReport()
	keep = np.ones(len(events), dtype=bool)
	feature_ids = events["feature_id"].to_numpy()
	values = events["value"].to_numpy(dtype=np.float64)

	for feature_id, row in percentiles.iterrows():
		if row["count"] < 2:
			report.skipped[int(feature_id)] = "fewer than 2 values"
			continue
		if row["p1"] <= 0:
			report.skipped[int(feature_id)] = "p1 <= 0"
			continue
		in_feature = feature_ids == feature_id
		outside = in_feature & ((values < LOW_FACTOR * row["p1"]) | (values > HIGH_FACTOR * row["p99"]))
		count = int(outside.sum())
		if count:
			report.dropped_by_feature[int(feature_id)] = count
			keep &= ~outside
	report.dropped = int((~keep).sum())

	if n_features is not None:
		for feature_id in range(n_features):
			if feature_id not in percentiles.index:
				report.skipped[feature_id] = "no values"
	if report.skipped:
		logger.warning("outlier filter skipped features %s", report.skipped)
	logger.info("outlier filter dropped %d of %d events", report.dropped, len(events))
	return events[keep].reset_index(drop=True), report


def feature_stats(events: pd.DataFrame) -> pd.DataFrame:
	grouped = events.groupby("feature_id")["value"]
	stats = pd.DataFrame({"mean": grouped.mean(), "std": grouped.std(ddof=0)})
	return stats.fillna(0.0)


def zscore(events: pd.DataFrame, stats: pd.DataFrame) -> pd.DataFrame:
	"""(value - mean) / std; zero-variance features map to 0."""
	mean = events["feature_id"].map(stats["mean"]).to_numpy(dtype=np.float64)
	std = events["feature_id"].map(stats["std"]).to_numpy(dtype=np.float64)
	values = events["value"].to_numpy(dtype=np.float64)
	scaled = np.divide(values - mean, std, out=np.zeros_like(values), where=std > 0)
	return events.assign(value=scaled)


def inverse_zscore(events: pd.DataFrame, stats: pd.DataFrame) -> pd.DataFrame:
	mean = events["feature_id"].map(stats["mean"]).to_numpy(dtype=np.float64)
	std = events["feature_id"].map(stats["std"]).to_numpy(dtype=np.float64)
	return events.assign(value=events["value"].to_numpy(dtype=np.float64) * std + mean)


def bucket_and_impute(
	events: pd.DataFrame, window: WindowSpec, patient_ids: list[str], n_features: int
) -> tuple[np.ndarray, np.ndarray]:
	"""Hourly [N, tau + H, F] grid.

	Readings in one (hour, feature) bucket are averaged; gaps carry the last
	observation forward; cells before the first observation hold 0 with mask 0.
	Events older than ``tau - max_lookback`` are dropped first.
	"""
	steps = window.grid_steps
	position = pd.Series(np.arange(len(patient_ids)), index=pd.Index(patient_ids))
	earliest = window.tau - window.lookback
	window_events = events[
		events["patient_id"].isin(position.index)
		& (events["time_hours"] >= earliest)
		& (events["time_hours"] < steps)
	]

	p_idx = window_events["patient_id"].map(position).to_numpy(dtype=int)
	hour = np.floor(window_events["time_hours"].to_numpy(dtype=np.float64)).astype(int)
	feature = window_events["feature_id"].to_numpy(dtype=int)

	shape = (len(patient_ids), steps, n_features)
	totals = np.zeros(shape)
	counts = np.zeros(shape)
	np.add.at(totals, (p_idx, hour, feature), window_events["value"].to_numpy(dtype=np.float64))
	np.add.at(counts, (p_idx, hour, feature), 1.0)

	observed = counts > 0
	means = np.divide(totals, counts, out=np.zeros(shape), where=observed)
	last_seen = np.where(observed, np.arange(steps)[None, :, None], -1)
	last_seen = np.maximum.accumulate(last_seen, axis=1)
	values = np.take_along_axis(means, np.clip(last_seen, 0, None), axis=1)
	values[last_seen < 0] = 0.0
	return values, observed.astype(np.float64)


@dataclass
class Dataset:
	"""Bucketed tensors for one task; excluded patients are already removed."""

	values: np.ndarray
	mask: np.ndarray
	labels: np.ndarray
	patient_ids: list[str]
	task: str
	window: WindowSpec
	stats: pd.DataFrame
	report: PreprocessReport

	@property
	def n_features(self) -> int:
		return self.values.shape[2]

	def __len__(self):
		return len(self.patient_ids)

	def index_of(self, patient_ids) -> np.ndarray:
		position = {pid: i for i, pid in enumerate(self.patient_ids)}
		return np.array([position[pid] for pid in patient_ids], dtype=int)

	def batch(self, index, with_labels: bool = True) -> SeqBatch:
		index = np.asarray(index, dtype=int)
		labels = self.labels[index] if with_labels else None
		return SeqBatch(self.values[index], self.mask[index], labels)


def prepare_dataset(cohort: Cohort, window: WindowSpec, task: str) -> Dataset:
	raw = cohort.events
	percentiles = feature_percentiles(raw)
	cleaned, outliers = remove_outliers(raw, percentiles, cohort.n_features)
	stats = feature_stats(cleaned)
	normalized = zscore(cleaned, stats)

	labels = cohort.task_labels(task)
	kept = labels[labels != EXCLUDED]
	patient_ids = [pid for pid in kept.index if pid in cohort.lengths.index]
	if not patient_ids:
		raise ConfigError(f"no labeled patients for task {task}")
	values, mask = bucket_and_impute(normalized, window, patient_ids, cohort.n_features)

	report = PreprocessReport(
		outliers=outliers,
		n_patients=len(patient_ids),
		n_excluded=int((labels == EXCLUDED).sum()),
		n_lookback_dropped=int((normalized["time_hours"] < window.tau - window.lookback).sum()),
	)
	logger.info("task %s: %d patients, %d excluded", task, report.n_patients, report.n_excluded)
	return Dataset(
		values=values,
		mask=mask,
		labels=kept.loc[patient_ids].to_numpy(dtype=np.float64),
		patient_ids=patient_ids,
		task=task,
		window=window,
		stats=stats,
		report=report,
	)

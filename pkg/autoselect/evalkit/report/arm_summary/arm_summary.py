# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from pathlib import Path

import pandas as pd

from autoselect.evalkit.report import as_filters
from autoselect.evalkit.summary import summarize
from autoselect.exceptions import ConfigError

METRIC_COLUMNS = ["arm", "task", "fraction", "fold", "auc_roc", "auc_pr", "sem"]
value_fields = ("auc_roc", "auc_pr")


def execute(filters=None):
	filters = as_filters(filters)
	validate_filters(filters)
	metrics = get_data(filters)
	columns = get_columns(filters, metrics)
	data = prepare_data(filters, metrics)
	return columns, data


def validate_filters(filters):
	if not filters.results_dir:
		raise ConfigError("results_dir is required")
	filters.results_dir = Path(filters.results_dir)
	if not filters.results_dir.is_dir():
		raise ConfigError(f"results_dir {filters.results_dir} does not exist")

	filters.metric = filters.metric or "auc_roc"
	if filters.metric not in value_fields:
		raise ConfigError(f"metric must be one of {', '.join(value_fields)}")


def get_data(filters) -> pd.DataFrame:
	"""Per-fold metric rows, from the combined file when present."""
	combined = filters.results_dir / "metrics.csv"
	paths = [combined] if combined.is_file() else sorted(filters.results_dir.rglob("metrics.csv"))
	if not paths:
		raise ConfigError(f"no metrics.csv under {filters.results_dir}")

	frames = [pd.read_csv(path) for path in paths]
	metrics = pd.concat(frames, ignore_index=True)
	missing = [col for col in METRIC_COLUMNS if col not in metrics.columns]
	if missing:
		raise ConfigError(f"metrics files lack columns {missing}")
	return metrics.drop_duplicates(["arm", "task", "fraction", "fold"], keep="last")


def get_arms(filters, metrics: pd.DataFrame) -> list[str]:
	arms = list(dict.fromkeys(metrics["arm"]))
	return filters.arms or arms


def prepare_data(filters, metrics: pd.DataFrame) -> list[dict]:
	arms = get_arms(filters, metrics)
	data = []
	for (task, fraction), rows in metrics.groupby(["task", "fraction"], sort=True):
		row = {"task": task, "fraction": float(fraction)}
		for arm in arms:
			values = rows.loc[rows["arm"] == arm, filters.metric].dropna()
			row[arm] = summarize(values).cell if len(values) else ""
		data.append(row)
	return data


def get_columns(filters, metrics: pd.DataFrame) -> list[dict]:
	columns = [
		{"fieldname": "task", "label": "Task", "fieldtype": "Data", "width": 12},
		{"fieldname": "fraction", "label": "Fraction", "fieldtype": "Float", "width": 8},
	]
	for arm in get_arms(filters, metrics):
		columns.append({"fieldname": arm, "label": arm, "fieldtype": "Data", "width": 16})
	return columns

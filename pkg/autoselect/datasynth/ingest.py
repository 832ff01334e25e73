# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""CSV ingestion.

events: ``patient_id,time_hours,feature_id,value``
labels: ``patient_id,task,label`` with label in {0, 1, excluded}

UTF-8, comma separated, decimal point, no thousands separators. Duplicate
(patient, time, feature) rows are accepted and averaged when bucketing.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from autoselect.datasynth.records import EVENT_COLUMNS, EXCLUDED, LABEL_COLUMNS, Cohort
from autoselect.exceptions import DataSchemaError

logger = logging.getLogger(__name__)

LABEL_CODES = {"0": 0, "1": 1, "excluded": EXCLUDED}


def _read(path: Path, columns: list[str]) -> pd.DataFrame:
	try:
		frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
	except pd.errors.EmptyDataError:
		raise DataSchemaError(f"{path.name}: empty file", line=1) from None
	if list(frame.columns) != columns:
		raise DataSchemaError(f"{path.name}: expected header {','.join(columns)}, got {','.join(frame.columns)}", line=1)
	return frame


def _first_bad(mask: pd.Series) -> int | None:
	bad = np.flatnonzero(mask.to_numpy())
	return int(bad[0]) + 2 if bad.size else None


def _numeric(frame: pd.DataFrame, column: str, path: Path) -> pd.Series:
	parsed = pd.to_numeric(frame[column], errors="coerce")
	line = _first_bad(parsed.isna() | ~np.isfinite(parsed.fillna(0.0)))
	if line is not None:
		raise DataSchemaError(f"{path.name}: {column} is not a finite number: {frame[column].iloc[line - 2]!r}", line=line)
	return parsed.astype(np.float64)


def _require_ids(frame: pd.DataFrame, path: Path):
	line = _first_bad(frame["patient_id"].str.strip() == "")
	if line is not None:
		raise DataSchemaError(f"{path.name}: empty patient_id", line=line)


def ingest_csv(events_path: str | Path, labels_path: str | Path, n_features: int | None = None) -> Cohort:
	events_path, labels_path = Path(events_path), Path(labels_path)
	raw = _read(events_path, EVENT_COLUMNS)
	_require_ids(raw, events_path)
	times = _numeric(raw, "time_hours", events_path)
	line = _first_bad(times < 0)
	if line is not None:
		raise DataSchemaError(f"{events_path.name}: negative time_hours", line=line)
	feature = _numeric(raw, "feature_id", events_path)
	line = _first_bad((feature < 0) | (feature != np.floor(feature)))
	if line is not None:
		raise DataSchemaError(f"{events_path.name}: feature_id must be a non-negative integer", line=line)
	values = _numeric(raw, "value", events_path)

	events = pd.DataFrame(
		{"patient_id": raw["patient_id"], "time_hours": times, "feature_id": feature.astype(np.int64), "value": values},
		columns=EVENT_COLUMNS,
	)
	inferred = int(events["feature_id"].max()) + 1 if len(events) else 0
	if n_features is None:
		n_features = inferred
	elif inferred > n_features:
		raise DataSchemaError(f"{events_path.name}: feature_id {inferred - 1} outside 0..{n_features - 1}")

	raw_labels = _read(labels_path, LABEL_COLUMNS)
	_require_ids(raw_labels, labels_path)
	line = _first_bad(~raw_labels["label"].isin(list(LABEL_CODES)))
	if line is not None:
		raise DataSchemaError(f"{labels_path.name}: label must be 0, 1 or excluded", line=line)
	labels = raw_labels.assign(label=raw_labels["label"].map(LABEL_CODES).astype(np.int64))
	line = _first_bad(labels.duplicated(["patient_id", "task"]))
	if line is not None:
		raise DataSchemaError(f"{labels_path.name}: duplicate label for patient and task", line=line)

	lengths = events.groupby("patient_id")["time_hours"].max()
	label_only = sorted(set(labels["patient_id"]) - set(lengths.index))
	lengths = pd.concat([lengths, pd.Series(0.0, index=label_only)]).sort_index()
	lengths.index.name = "patient_id"
	lengths.name = "length_hours"

	logger.info("ingested %d events for %d patients", len(events), len(lengths))
	return Cohort(events, labels, n_features, lengths)

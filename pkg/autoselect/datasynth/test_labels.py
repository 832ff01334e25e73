# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import pandas as pd
import pytest

from autoselect.datasynth.labels import Criterion, label_counts, make_labels
from autoselect.datasynth.records import EXCLUDED, NEGATIVE, POSITIVE, Cohort, WindowSpec
from autoselect.exceptions import ConfigError

WINDOW = WindowSpec(observation_hours=48, horizon_hours=8, label_hours=48)


def _cohort(rows, lengths):
	events = pd.DataFrame(rows, columns=["patient_id", "time_hours", "feature_id", "value"])
	labels = pd.DataFrame(columns=["patient_id", "task", "label"])
	return Cohort(events, labels, 2, pd.Series(lengths, name="length_hours"))


def test_threshold_criterion_windows():
	cohort = _cohort(
		[
			("late", 60.0, 1, 2.5),
			("early", 24.0, 1, 3.0),
			("never", 10.0, 1, 1.0),
			("other_feature", 60.0, 0, 9.0),
		],
		{"late": 100.0, "early": 100.0, "never": 100.0, "other_feature": 100.0, "short": 30.0},
	)
	labels = make_labels(cohort, Criterion(feature_id=1, threshold=2.0), WINDOW)
	assert labels["late"] == POSITIVE
	assert labels["early"] == EXCLUDED
	assert labels["never"] == NEGATIVE
	assert labels["other_feature"] == NEGATIVE
	assert labels["short"] == EXCLUDED
	assert sum(label_counts(labels).values()) == 5


def test_onset_criterion():
	cohort = _cohort([], {"a": 120.0, "b": 120.0})
	labels = make_labels(cohort, Criterion(onsets={"a": 50.0, "b": 110.0}), WINDOW)
	assert labels.to_dict() == {"a": POSITIVE, "b": NEGATIVE}


def test_criterion_needs_a_rule():
	with pytest.raises(ConfigError):
		Criterion(feature_id=1)
	with pytest.raises(ConfigError):
		Criterion(feature_id=1, threshold=2.0, direction="gt")

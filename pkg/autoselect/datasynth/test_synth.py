# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import numpy as np
import pandas as pd
import pytest
import yaml

from autoselect.datasynth.labels import label_counts
from autoselect.datasynth.records import WindowSpec
from autoselect.datasynth.synth import TASK_ALT, TASK_PRIMARY, TASK_TREND, SynthOptions, generate_cohort, write_cohort_csv
from autoselect.evalkit.metrics import auc_roc
from autoselect.exceptions import ConfigError
from autoselect.numcore.rng import RngStream

SMALL = WindowSpec(observation_hours=6, horizon_hours=3, label_hours=6)
DENSE = SynthOptions(observation_density=1.0, missingness_spread=0.0, measurement_noise=0.0, label_noise=0.0)


def test_same_seed_same_cohort():
	a = generate_cohort(30, 4, [0, 1], seed=9, window=SMALL)
	b = generate_cohort(30, 4, [0, 1], seed=9, window=SMALL)
	pd.testing.assert_frame_equal(a.events, b.events)
	pd.testing.assert_frame_equal(a.labels, b.labels)
	assert a.manifest == b.manifest
	assert not generate_cohort(30, 4, [0, 1], seed=10, window=SMALL).events.equals(a.events)


@pytest.mark.parametrize("relevant", [[], [0, 0], [4], [-1]])
def test_invalid_relevant_set(relevant):
	with pytest.raises(ConfigError):
		generate_cohort(10, 4, relevant, seed=0, window=SMALL)


def test_overlapping_alt_set_is_rejected():
	with pytest.raises(ConfigError):
		generate_cohort(10, 4, [0, 1], seed=0, window=SMALL, options=SynthOptions(relevant_alt=(1, 2)))


def test_noise_free_label_follows_any_relevant_channel():
	window = SMALL
	cohort = generate_cohort(200, 2, [0, 1], seed=4, window=window, options=DENSE)
	labels = cohort.task_labels(TASK_PRIMARY)
	events = cohort.events
	hour = np.floor(events["time_hours"])
	in_window = (hour >= window.label_start) & (hour < window.label_end)
	for channel in (0, 1):
		rows = events[in_window & (events["feature_id"] == channel)]
		score = rows.groupby("patient_id")["value"].mean().sort_index()
		rebuilt = (score > score.median()).astype(int)
		np.testing.assert_array_equal(rebuilt.to_numpy(), labels.loc[score.index].to_numpy())


def test_logistic_link_base_rate():
	window = WindowSpec(observation_hours=4, horizon_hours=2, label_hours=4)
	cohort = generate_cohort(10_000, 1, [0], seed=1, window=window, options=SynthOptions(label_noise=0.5))
	assert cohort.task_labels(TASK_PRIMARY).mean() == pytest.approx(0.5, abs=0.02)


def test_labels_partition_the_cohort():
	cohort = generate_cohort(50, 3, [1], seed=2, window=SMALL)
	for task in (TASK_PRIMARY, TASK_TREND):
		counts = label_counts(cohort.task_labels(task))
		assert sum(counts.values()) == 50


def test_manifest_records_the_construction():
	options = SynthOptions(relevant_alt=(2, 3))
	cohort = generate_cohort(20, 5, [1, 0], seed=3, window=SMALL, options=options)
	assert cohort.manifest["relevant"] == [0, 1]
	assert cohort.manifest["relevant_alt"] == [2, 3]
	assert set(cohort.manifest["thresholds"]) == {TASK_PRIMARY, TASK_TREND, TASK_ALT}
	assert cohort.tasks == [TASK_ALT, TASK_PRIMARY, TASK_TREND]


def test_events_stay_inside_the_record():
	cohort = generate_cohort(20, 3, [0], seed=5, window=SMALL)
	assert cohort.events["time_hours"].min() >= 0
	assert cohort.events["time_hours"].max() < cohort.manifest["record_hours"]
	assert cohort.events["value"].min() > 0


def test_short_record_is_rejected():
	with pytest.raises(ConfigError):
		generate_cohort(5, 2, [0], seed=0, window=SMALL, options=SynthOptions(record_hours=4))


def test_written_files_are_byte_stable(tmp_path):
	cohort = generate_cohort(15, 3, [0], seed=7, window=SMALL)
	first = write_cohort_csv(cohort, tmp_path / "a")
	second = write_cohort_csv(generate_cohort(15, 3, [0], seed=7, window=SMALL), tmp_path / "b")
	for key in ("events", "labels", "manifest"):
		assert first[key].read_bytes() == second[key].read_bytes()

	manifest = yaml.safe_load(first["manifest"].read_text())
	events = pd.read_csv(first["events"])
	assert len(events) == manifest["n_events"]
	assert len(pd.read_csv(first["labels"])) == 2 * manifest["n_patients"]


@pytest.mark.slow
def test_permuted_labels_drop_a_perfect_score_to_chance():
	window = SMALL
	cohort = generate_cohort(400, 2, [0, 1], seed=5, window=window, options=DENSE)
	labels = cohort.task_labels(TASK_PRIMARY)
	events = cohort.events
	hour = np.floor(events["time_hours"])
	rows = events[(hour >= window.label_start) & (hour < window.label_end) & (events["feature_id"] == 0)]
	score = rows.groupby("patient_id")["value"].mean().loc[labels.index].to_numpy()
	assert auc_roc(score, labels.to_numpy()) == 1.0

	rng = RngStream(5, "permuted_labels").generator()
	aucs = np.array([auc_roc(score, rng.permutation(labels.to_numpy())) for _ in range(20)])
	assert aucs.mean() == pytest.approx(0.5, abs=0.07)
	assert np.all(np.abs(aucs - 0.5) < 0.2)

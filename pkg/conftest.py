# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import numpy as np
import pytest

from autoselect.datasynth import WindowSpec, generate_cohort, prepare_dataset
from autoselect.metaselect.autoselect import BilevelData
from autoselect.metaselect.problem import SeqProblem
from autoselect.metaselect.schedule import LoopSchedule


@pytest.fixture(scope="session")
def tiny_window():
	return WindowSpec(observation_hours=6, horizon_hours=3, label_hours=6)


@pytest.fixture(scope="session")
def tiny_cohort(tiny_window):
	return generate_cohort(n_patients=80, n_features=4, relevant=(0, 1), seed=3, window=tiny_window)


@pytest.fixture(scope="session")
def tiny_dataset(tiny_cohort, tiny_window):
	return prepare_dataset(tiny_cohort, tiny_window, "primary")


@pytest.fixture
def tiny_data(tiny_dataset):
	n = len(tiny_dataset)
	order = np.arange(n)
	return BilevelData(
		dataset=tiny_dataset,
		pretrain_index=order[: int(0.8 * n)],
		train_index=order[: int(0.8 * n)],
		meta_val_index=order[int(0.8 * n) : int(0.9 * n)],
		stop_val_index=order[int(0.9 * n) :],
	)


@pytest.fixture
def tiny_problem(tiny_dataset, tiny_window):
	return SeqProblem(tiny_dataset.n_features, tiny_window.tau, tiny_window.horizon_hours)


@pytest.fixture
def tiny_schedule():
	return LoopSchedule(
		pretrain_steps=3,
		finetune_steps=2,
		outer_steps=4,
		pretrain_lr=0.05,
		finetune_lr=0.05,
		meta_lr=0.5,
		batch_size=8,
		min_finetune_steps=4,
		early_stop_every=2,
		patience=2,
	)


@pytest.fixture
def tiny_run(tmp_path):
	"""A run configuration small enough for end-to-end tests, as a plain mapping."""
	return {
		"cohort": {"kind": "synthetic", "n_patients": 60, "n_features": 3, "relevant": [0, 1]},
		"window": {"observation_hours": 6, "horizon_hours": 3, "label_hours": 6},
		"model": {"hidden_size": 3},
		"schedule": {
			"pretrain_steps": 2,
			"finetune_steps": 1,
			"outer_steps": 2,
			"pretrain_lr": 0.05,
			"finetune_lr": 0.05,
			"meta_lr": 0.5,
			"batch_size": 8,
			"min_finetune_steps": 4,
			"early_stop_every": 2,
			"patience": 2,
		},
		"arms": ["supervised", "pretrain_all", "autoselect"],
		"fractions": [1.0],
		"n_folds": 2,
		"folds": [0],
		"proportions": [0.6, 0.2, 0.2],
		"seed": 1,
		"out": str(tmp_path / "results"),
	}

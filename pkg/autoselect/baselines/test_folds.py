# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import pytest

from autoselect.baselines.folds import prepare_fold
from autoselect.evalkit.splits import assign_splits
from autoselect.exceptions import ConfigError


def _ids(data, index):
	return {data.dataset.patient_ids[i] for i in index}


def test_roles_are_disjoint_and_cover_the_dataset(tiny_dataset):
	splits = assign_splits(tiny_dataset.patient_ids, n_folds=5, proportions=(0.6, 0.2, 0.2))
	data = prepare_fold(tiny_dataset, splits, 2)
	pool, meta, stop, test = (
		_ids(data, data.pretrain_index),
		_ids(data, data.meta_val_index),
		_ids(data, data.stop_val_index),
		_ids(data, data.test_index),
	)
	assert not (pool & meta or pool & stop or pool & test or meta & stop or meta & test or stop & test)
	assert pool | meta | stop | test == set(tiny_dataset.patient_ids)
	assert _ids(data, data.train_index) == pool


def test_fraction_subsets_are_nested(tiny_dataset):
	splits = assign_splits(tiny_dataset.patient_ids, n_folds=3, proportions=(0.6, 0.2, 0.2))

	def train_ids(fraction):
		data = prepare_fold(tiny_dataset, splits, 0, fraction)
		return _ids(data, data.train_index)

	small, medium, full = train_ids(0.1), train_ids(0.5), train_ids(1.0)
	assert 1 <= len(small) < len(medium) < len(full)
	assert small <= medium <= full


def test_fold_without_validation_is_rejected(tiny_dataset):
	splits = assign_splits(tiny_dataset.patient_ids, n_folds=1, proportions=(0.9, 0.0, 0.1))
	with pytest.raises(ConfigError):
		prepare_fold(tiny_dataset, splits, 0)

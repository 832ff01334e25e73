# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import logging

from autoselect.datasynth.preprocess import Dataset
from autoselect.evalkit.splits import SplitAssignment, fraction_subset
from autoselect.exceptions import ConfigError
from autoselect.metaselect.autoselect import BilevelData

logger = logging.getLogger(__name__)


def prepare_fold(dataset: Dataset, splits: SplitAssignment, fold: int, fraction: float = 1.0) -> BilevelData:
	"""Index sets of one fold.

	Every train patient feeds pretraining; the primary-task train subset is
	the nested hash prefix of size ``fraction``. The validation role splits
	into meta-val (task weights) and stop-val (early stopping).
	"""
	present = set(dataset.patient_ids)

	def kept(ids):
		return [pid for pid in ids if pid in present]

	train = kept(splits.members(fold, "train"))
	meta_val, stop_val = (kept(ids) for ids in splits.validation_halves(fold))
	test = kept(splits.members(fold, "test"))
	if not train:
		raise ConfigError(f"fold {fold} has no training patients")
	if not meta_val:
		raise ConfigError(f"fold {fold} has no meta-validation patients")
	subset = fraction_subset(train, fraction)
	logger.info(
		"fold %d fraction %g: %d pretrain, %d train, %d meta-val, %d stop-val, %d test",
		fold,
		fraction,
		len(train),
		len(subset),
		len(meta_val),
		len(stop_val),
		len(test),
	)
	return BilevelData(
		dataset=dataset,
		pretrain_index=dataset.index_of(train),
		train_index=dataset.index_of(subset),
		meta_val_index=dataset.index_of(meta_val),
		stop_val_index=dataset.index_of(stop_val),
		test_index=dataset.index_of(test),
	)

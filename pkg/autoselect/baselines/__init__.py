# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from autoselect.baselines.arms import (
	ARM_KINDS,
	ArmContext,
	ArmOptions,
	ArmResult,
	ArmSpec,
	run_ablation,
	run_autoselect,
	run_cotrain,
	run_pretrain_all,
	run_pretrain_down,
	run_pretrain_top,
	run_supervised,
	run_transfer,
	select_tasks,
)
from autoselect.baselines.folds import prepare_fold

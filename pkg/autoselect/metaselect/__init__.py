# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from autoselect.metaselect.autoselect import (
	AutoselectResult,
	BilevelData,
	BilevelResult,
	TrainingLog,
	autoselect_train,
	bilevel_pretrain,
	final_finetune,
)
from autoselect.metaselect.hypergrad import HyperGradient, exact_hypergrad, fd_hypergrad, first_order_hypergrad
from autoselect.metaselect.loops import BatchStream, InnerTrace, inner_finetune, inner_pretrain
from autoselect.metaselect.problem import BilevelProblem, SeqProblem
from autoselect.metaselect.schedule import LoopSchedule
from autoselect.metaselect.weights import TaskWeights, update_lambda

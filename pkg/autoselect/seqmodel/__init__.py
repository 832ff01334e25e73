from autoselect.seqmodel.batch import SeqBatch
from autoselect.seqmodel.checkpoint import load_checkpoint, save_checkpoint
from autoselect.seqmodel.model import (
	classification_loss,
	classify,
	decode,
	encode,
	forecast,
	per_task_mse,
	predict_proba,
	pretrain_loss,
	task_losses,
)
from autoselect.seqmodel.params import ModelParams, init_classifier, init_params

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from dataclasses import dataclass

from autoselect.exceptions import ConfigError

CONTRACTIONS = ("scalar", "per_task")
HYPERGRAD_METHODS = ("first_order", "exact")


@dataclass(frozen=True)
class LoopSchedule:
	"""Loop sizes and learning rates.

	``outer_steps`` defaults to budget // (pretrain_steps + finetune_steps).
	"""

	pretrain_steps: int = 100
	finetune_steps: int = 50
	outer_steps: int | None = None
	budget: int = 5000
	pretrain_lr: float = 0.005
	finetune_lr: float = 0.001
	meta_lr: float = 0.01
	batch_size: int = 32
	finetune_epochs: int = 5
	min_finetune_steps: int = 100
	early_stop_every: int = 50
	patience: int = 10
	log_every: int = 10
	warm_start: bool = True
	reinit_classifier: bool = True
	contraction: str = "scalar"
	hypergrad: str = "first_order"

	def __post_init__(self):
		for name in ("pretrain_steps", "finetune_steps", "budget", "batch_size", "early_stop_every", "patience"):
			if getattr(self, name) < 1:
				raise ConfigError(f"{name} must be at least 1")
		if self.outer_steps is not None and self.outer_steps < 1:
			raise ConfigError("outer_steps must be at least 1")
		if self.finetune_epochs < 0 or self.min_finetune_steps < 0 or self.log_every < 1:
			raise ConfigError("finetune_epochs, min_finetune_steps and log_every must be non-negative")
		for name in ("pretrain_lr", "finetune_lr", "meta_lr"):
			if getattr(self, name) < 0:
				raise ConfigError(f"{name} must not be negative")
		if self.contraction not in CONTRACTIONS:
			raise ConfigError(f"contraction must be one of {CONTRACTIONS}")
		if self.hypergrad not in HYPERGRAD_METHODS:
			raise ConfigError(f"hypergrad must be one of {HYPERGRAD_METHODS}")

	@property
	def n_outer(self) -> int:
		if self.outer_steps is not None:
			return self.outer_steps
		return max(1, self.budget // (self.pretrain_steps + self.finetune_steps))

	@property
	def inner_steps(self) -> int:
		return self.n_outer * (self.pretrain_steps + self.finetune_steps)

	def final_finetune_steps(self, n_train: int) -> int:
		batches_per_epoch = -(-max(n_train, 1) // self.batch_size)
		return max(self.min_finetune_steps, self.finetune_epochs * batches_per_epoch)

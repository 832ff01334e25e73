# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Run configuration: YAML sections mapped onto frozen dataclasses.

Precedence is defaults < YAML file < CLI flags < environment. Every output
directory gets the effective configuration as ``run_config.yaml``.
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from autoselect.baselines.arms import ARM_KINDS, ArmOptions
from autoselect.datasynth.labels import Criterion
from autoselect.datasynth.records import WindowSpec
from autoselect.datasynth.synth import SynthOptions, validate_relevant
from autoselect.exceptions import ConfigError
from autoselect.metaselect.schedule import LoopSchedule

logger = logging.getLogger(__name__)

RUN_CONFIG_FILE = "run_config.yaml"
COHORT_KINDS = ("synthetic", "csv")
INIT_SCHEMES = ("uniform",)


@dataclass(frozen=True)
class CohortSource:
	"""Where patients come from: a generated cohort or an events/labels CSV pair.

	``criteria`` maps a task name to ``Criterion`` fields; each one relabels
	the cohort from its events instead of the labels file.
	"""

	kind: str = "synthetic"
	n_patients: int = 2000
	n_features: int = 16
	relevant: tuple[int, ...] = (0, 1, 2, 3)
	events_path: str | None = None
	labels_path: str | None = None
	criteria: dict = field(default_factory=dict)

	def __post_init__(self):
		if self.kind not in COHORT_KINDS:
			raise ConfigError(f"cohort.kind must be one of {COHORT_KINDS}")
		if self.n_patients < 1 or self.n_features < 1:
			raise ConfigError("cohort.n_patients and cohort.n_features must be positive")
		if self.kind == "synthetic":
			validate_relevant(self.relevant, self.n_features)
		elif not (self.events_path and self.labels_path):
			raise ConfigError("csv cohorts need cohort.events_path and cohort.labels_path")
		for task, fields in self.criteria.items():
			if not isinstance(fields, dict):
				raise ConfigError(f"cohort.criteria.{task} must be a mapping")
			self.criterion(task)

	def criterion(self, task: str) -> Criterion:
		try:
			return Criterion(**self.criteria[task])
		except TypeError as err:
			raise ConfigError(f"cohort.criteria.{task}: {err}") from err


@dataclass(frozen=True)
class ModelSpec:
	hidden_size: int = 70
	init: str = "uniform"

	def __post_init__(self):
		if self.hidden_size < 1:
			raise ConfigError("model.hidden_size must be positive")
		if self.init not in INIT_SCHEMES:
			raise ConfigError(f"model.init must be one of {INIT_SCHEMES}")


@dataclass(frozen=True)
class RunConfig:
	cohort: CohortSource = field(default_factory=CohortSource)
	window: WindowSpec = field(default_factory=WindowSpec)
	model: ModelSpec = field(default_factory=ModelSpec)
	schedule: LoopSchedule = field(default_factory=LoopSchedule)
	arm_options: ArmOptions = field(default_factory=ArmOptions)
	synth: SynthOptions = field(default_factory=SynthOptions)
	arms: tuple[str, ...] = ("supervised", "pretrain_all", "cotrain", "autoselect")
	task: str = "primary"
	fractions: tuple[float, ...] = (0.01, 0.1, 1.0)
	n_folds: int = 10
	folds: tuple[int, ...] | None = None
	proportions: tuple[float, ...] = (0.8, 0.1, 0.1)
	seed: int = 0
	out: str = "results"
	jobs: int = 1

	def __post_init__(self):
		unknown = [arm for arm in self.arms if arm not in ARM_KINDS]
		if unknown or not self.arms:
			raise ConfigError(f"unknown arms {unknown}; choose from {', '.join(ARM_KINDS)}")
		if not self.fractions or any(not 0 < f <= 1 for f in self.fractions):
			raise ConfigError("fractions must be in (0, 1]")
		if self.n_folds < 1:
			raise ConfigError("n_folds must be at least 1")
		if self.folds is not None and any(not 0 <= f < self.n_folds for f in self.folds):
			raise ConfigError(f"folds must lie in 0..{self.n_folds - 1}")
		if self.jobs < 1:
			raise ConfigError("jobs must be at least 1")
		if self.cohort.kind == "synthetic" and self.task not in ("primary", "trend", "alt"):
			raise ConfigError(f"synthetic cohorts have tasks primary, trend and alt, not {self.task}")
		if self.task == "alt" and not self.synth.relevant_alt:
			raise ConfigError("task alt needs synth.relevant_alt")

	@property
	def fold_list(self) -> list[int]:
		return list(self.folds) if self.folds is not None else list(range(self.n_folds))

	@property
	def n_features(self) -> int:
		return self.cohort.n_features


SECTIONS = {
	"cohort": CohortSource,
	"window": WindowSpec,
	"model": ModelSpec,
	"schedule": LoopSchedule,
	"arm_options": ArmOptions,
	"synth": SynthOptions,
}


def _coerce(cls, name: str, value):
	default = next(f for f in dataclasses.fields(cls) if f.name == name)
	is_tuple = isinstance(default.default, tuple) or "tuple" in str(default.type)
	if is_tuple and isinstance(value, list):
		return tuple(value)
	return value


def _build(cls, data, section: str):
	if data is None:
		data = {}
	if not isinstance(data, dict):
		raise ConfigError(f"{section} must be a mapping")
	names = {f.name for f in dataclasses.fields(cls)}
	unknown = sorted(set(data) - names)
	if unknown:
		raise ConfigError(f"unknown keys in {section}: {', '.join(unknown)}")
	values = {name: _coerce(cls, name, value) for name, value in data.items()}
	try:
		return cls(**values)
	except TypeError as err:
		raise ConfigError(f"{section}: {err}") from err


def from_dict(data: dict | None) -> RunConfig:
	data = dict(data or {})
	sections = {name: _build(cls, data.pop(name, None), name) for name, cls in SECTIONS.items()}
	return _build(RunConfig, {**data, **sections}, "run config")


def _plain(value):
	if isinstance(value, tuple):
		return [_plain(v) for v in value]
	if isinstance(value, dict):
		return {k: _plain(v) for k, v in value.items()}
	return value


def to_dict(config: RunConfig) -> dict:
	data = {}
	for f in dataclasses.fields(config):
		value = getattr(config, f.name)
		if dataclasses.is_dataclass(value):
			value = {g.name: _plain(getattr(value, g.name)) for g in dataclasses.fields(value)}
		data[f.name] = _plain(value)
	return data


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
	"""Defaults, then the YAML file, then ``overrides`` (top-level keys only)."""
	data = {}
	if path is not None:
		path = Path(path)
		if not path.is_file():
			raise ConfigError(f"config file {path} does not exist")
		try:
			data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
		except yaml.YAMLError as err:
			raise ConfigError(f"{path}: {err}") from err
		if not isinstance(data, dict):
			raise ConfigError(f"{path} must hold a mapping")
	for key, value in (overrides or {}).items():
		if value is not None:
			data[key] = value
	return from_dict(data)


def dump_config(config: RunConfig, directory: str | Path) -> Path:
	path = Path(directory) / RUN_CONFIG_FILE
	path.write_text(yaml.safe_dump(to_dict(config), sort_keys=False), encoding="utf-8")
	return path

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Job functions behind the CLI subcommands."""

import logging
import shutil
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from pkgutil import resolve_name

import pandas as pd

from autoselect import hooks
from autoselect.baselines.arms import ArmContext, ArmResult, ArmSpec
from autoselect.baselines.folds import prepare_fold
from autoselect.config import RunConfig, dump_config
from autoselect.datasynth import generate_cohort, ingest_csv, make_labels, prepare_dataset, write_cohort_csv
from autoselect.datasynth.labels import label_counts
from autoselect.datasynth.records import Cohort
from autoselect.evalkit.report.arm_summary.arm_summary import METRIC_COLUMNS
from autoselect.evalkit.splits import assign_splits
from autoselect.exceptions import ConfigError, DivergenceError, OracleFailure
from autoselect.metaselect.problem import SeqProblem
from autoselect.metaselect.report.oracle_check.oracle_check import failures
from autoselect.numcore.rng import RngStream
from autoselect.seqmodel.checkpoint import save_checkpoint

logger = logging.getLogger(__name__)

PARTIAL_SUFFIX = ".partial"


def render_table(columns: list[dict], data: list[dict]) -> str:
	"""Aligned text for a report's (columns, data)."""
	frame = pd.DataFrame(data, columns=[c["fieldname"] for c in columns])
	for column in columns:
		if column["fieldtype"] == "Float":
			frame[column["fieldname"]] = frame[column["fieldname"]].map(lambda v: "" if pd.isna(v) else f"{v:.3g}")
	frame.columns = [c["label"] for c in columns]
	return frame.to_string(index=False)


def _writable(directory: Path) -> Path:
	try:
		directory.mkdir(parents=True, exist_ok=True)
	except OSError as err:
		raise ConfigError(f"cannot write to {directory}: {err}") from err
	return directory


def load_cohort(config: RunConfig) -> Cohort:
	source = config.cohort
	if source.kind == "synthetic":
		cohort = generate_cohort(
			source.n_patients, source.n_features, source.relevant, config.seed, config.window, config.synth
		)
	else:
		cohort = ingest_csv(source.events_path, source.labels_path, source.n_features)
	for task in source.criteria:
		cohort = cohort.with_labels(task, make_labels(cohort, source.criterion(task), config.window))
	for task in cohort.tasks:
		logger.info("task %s: %s", task, ", ".join(f"{k} {v}" for k, v in label_counts(cohort.task_labels(task)).items()))
	return cohort


def cmd_synth(config: RunConfig) -> Path:
	if config.cohort.kind != "synthetic":
		raise ConfigError("synth needs cohort.kind synthetic")
	out = _writable(Path(config.out))
	cohort = load_cohort(config)
	paths = write_cohort_csv(cohort, out)
	dump_config(config, out)
	logger.info("wrote %d events for %d patients to %s", len(cohort.events), len(cohort.patient_ids), out)
	return paths["events"].parent


def cell_seed(seed: int, fold: int) -> int:
	return int(RngStream(seed, "fold", fold).generator().integers(2**31 - 1))


def _cell_dir(out: Path, arm: str, fold: int, fraction: float) -> Path:
	return out / arm / f"fold{fold}" / f"fraction{fraction:g}"


def _write_arm(directory: Path, result: ArmResult):
	pd.DataFrame([result.metrics], columns=METRIC_COLUMNS).to_csv(
		directory / "metrics.csv", index=False, lineterminator="\n"
	)
	if result.log is not None:
		result.log.write_csv(directory / "lambda_trajectory.csv")
	result.dynamics.write_csv(directory / "dynamics.csv")
	logits = result.task_weights.logits if result.task_weights is not None else None
	save_checkpoint(directory / "checkpoint.bin", result.params, logits)


class CellRunner:
	"""All configured arms for one (fold, fraction), sharing datasets and sources."""

	def __init__(self, config: RunConfig, cohort: Cohort, fold: int, fraction: float):
		self.config = config
		self.cohort = cohort
		self.fold = fold
		self.fraction = fraction
		self.seed = cell_seed(config.seed, fold)
		self.splits = assign_splits(cohort.patient_ids, config.n_folds, config.proportions)
		self._contexts = {}
		self._sources = {}

	def context(self, task: str) -> ArmContext:
		if task not in self._contexts:
			dataset = prepare_dataset(self.cohort, self.config.window, task)
			self._contexts[task] = ArmContext(
				problem=SeqProblem(dataset.n_features, self.config.window.tau, self.config.window.horizon_hours),
				data=prepare_fold(dataset, self.splits, self.fold, self.fraction),
				schedule=self.config.schedule,
				seed=self.seed,
				hidden_size=self.config.model.hidden_size,
				task=task,
				fold=self.fold,
				fraction=self.fraction,
				options=self.config.arm_options,
			)
		return self._contexts[task]

	def source(self, arm: str) -> ArmResult | None:
		kind = hooks.arm_sources.get(arm)
		if kind is None:
			return None
		task = self.config.arm_options.transfer_source if arm == "transfer" else self.config.task
		if (kind, task) not in self._sources:
			logger.info("running %s on %s as the source of %s", kind, task, arm)
			self._sources[(kind, task)] = resolve_name(hooks.arm_runners[kind])(self.context(task))
		return self._sources[(kind, task)]

	def run_arm(self, arm: str) -> dict:
		options = self.config.arm_options
		spec = ArmSpec(arm, self.fraction, options.top_k, options.transfer_source if arm == "transfer" else None)
		final = _cell_dir(Path(self.config.out), arm, self.fold, self.fraction)
		partial = final.with_name(final.name + PARTIAL_SUFFIX)
		shutil.rmtree(partial, ignore_errors=True)
		partial.mkdir(parents=True)
		dump_config(self.config, partial)

		result = self._sources.get((spec.kind, self.config.task))
		try:
			if result is None:
				result = resolve_name(hooks.arm_runners[spec.kind])(self.context(self.config.task), self.source(arm))
		except DivergenceError as err:
			if err.partial_log is not None:
				err.partial_log.write_csv(partial / "lambda_trajectory.csv")
			raise
		if spec.kind == "autoselect":
			self._sources[("autoselect", self.config.task)] = result
		_write_arm(partial, result)
		shutil.rmtree(final, ignore_errors=True)
		partial.rename(final)
		return result.metrics

	def run(self) -> list[dict]:
		return [self.run_arm(arm) for arm in self.config.arms]


def run_cell(config: RunConfig, cohort: Cohort, fold: int, fraction: float) -> list[dict]:
	return CellRunner(config, cohort, fold, fraction).run()


def cmd_run(config: RunConfig) -> Path:
	"""Every arm on every (fold, fraction) cell, then a combined metrics.csv."""
	out = _writable(Path(config.out))
	dump_config(config, out)
	cohort = load_cohort(config)
	cells = [(fold, fraction) for fold in config.fold_list for fraction in config.fractions]
	logger.info("%d cells x %d arms with %d job(s)", len(cells), len(config.arms), config.jobs)

	if config.jobs == 1:
		rows = [row for fold, fraction in cells for row in run_cell(config, cohort, fold, fraction)]
	else:
		with ProcessPoolExecutor(max_workers=config.jobs) as pool:
			futures = [pool.submit(run_cell, config, cohort, fold, fraction) for fold, fraction in cells]
			rows = [row for future in futures for row in future.result()]

	metrics = pd.DataFrame(rows, columns=METRIC_COLUMNS).sort_values(["arm", "task", "fraction", "fold"], kind="stable")
	metrics.to_csv(out / "metrics.csv", index=False, lineterminator="\n")
	logger.info("wrote %d metric rows to %s", len(metrics), out / "metrics.csv")
	return out


def cmd_check(
	config: RunConfig | None = None, inject_fault: str | None = None, out: str | Path | None = None
) -> str:
	"""Run the oracle suite; raises OracleFailure naming every failing fixture.

	With a config, its seed redraws the gradient fixtures.
	"""
	report = resolve_name(hooks.reports["oracle_check"])
	filters = {"inject_fault": inject_fault}
	if config is not None:
		filters["grad_seed"] = config.seed
	columns, data = report(filters)
	table = render_table(columns, data)
	print(table)
	if out is not None:
		directory = _writable(Path(out))
		pd.DataFrame(data).to_csv(directory / "oracle_check.csv", index=False, lineterminator="\n")
	failing = failures(data)
	if failing:
		raise OracleFailure(f"{len(failing)} oracle check(s) failed: {', '.join(failing)}")
	return table


def cmd_report(results_dir: str | Path, metrics=("auc_roc", "auc_pr")) -> dict[str, str]:
	"""Task x fraction rows, one column per arm, "mean (sem)" cells; text and CSV per metric."""
	report = resolve_name(hooks.reports["arm_summary"])
	results_dir = Path(results_dir)
	tables = {}
	for metric in metrics:
		columns, data = report({"results_dir": results_dir, "metric": metric})
		table = render_table(columns, data)
		frame = pd.DataFrame(data, columns=[c["fieldname"] for c in columns])
		frame.to_csv(results_dir / f"summary_{metric}.csv", index=False, lineterminator="\n")
		(results_dir / f"summary_{metric}.txt").write_text(table + "\n", encoding="utf-8")
		print(f"{metric}\n{table}\n")
		tables[metric] = table
	return tables

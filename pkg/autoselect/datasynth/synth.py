# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Synthetic EMR-like cohorts with a known relevant channel set.

Each patient carries a latent state z_t: a random walk with a per-patient
drift. Channels in the relevant set S read ``offset_f + a_f * z_t`` plus
measurement noise; every other channel is stationary AR(1) noise around its
own offset. Labels are functions of z over the label window, thresholded at
their cohort median, so classes are balanced and only S carries signal.
An optional second latent drives a disjoint set S2 and the ``alt`` task.
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import yaml
from scipy.special import expit

from autoselect.datasynth.records import EVENT_COLUMNS, LABEL_COLUMNS, Cohort, WindowSpec
from autoselect.exceptions import ConfigError
from autoselect.numcore.rng import RngStream

logger = logging.getLogger(__name__)

TASK_PRIMARY = "primary"
TASK_TREND = "trend"
TASK_ALT = "alt"


@dataclass(frozen=True)
class SynthOptions:
	record_hours: int | None = None
	observation_density: float = 0.6
	missingness_spread: float = 0.3
	measurement_noise: float = 0.1
	latent_noise: float = 0.3
	drift_scale: float = 0.05
	label_noise: float = 0.0
	ar_coefficient: float = 0.8
	offset: float = 10.0
	relevant_alt: tuple[int, ...] = field(default_factory=tuple)

	def __post_init__(self):
		if not 0 < self.observation_density <= 1:
			raise ConfigError("observation_density must be in (0, 1]")
		if not 0 <= self.missingness_spread < 1:
			raise ConfigError("missingness_spread must be in [0, 1)")
		for name in ("measurement_noise", "latent_noise", "drift_scale", "label_noise"):
			if getattr(self, name) < 0:
				raise ConfigError(f"{name} must not be negative")
		if not -1 < self.ar_coefficient < 1:
			raise ConfigError("ar_coefficient must be in (-1, 1)")


def validate_relevant(relevant, n_features: int, name: str = "relevant") -> tuple[int, ...]:
	relevant = tuple(int(f) for f in relevant)
	if not relevant:
		raise ConfigError(f"{name} set must not be empty")
	if len(set(relevant)) != len(relevant):
		raise ConfigError(f"{name} set has duplicates: {list(relevant)}")
	bad = [f for f in relevant if not 0 <= f < n_features]
	if bad:
		raise ConfigError(f"{name} channels {bad} outside 0..{n_features - 1}")
	return tuple(sorted(relevant))


def _latent(rng, n_patients: int, hours: int, options: SynthOptions) -> np.ndarray:
	start = rng.normal(size=n_patients)
	drift = rng.normal(scale=options.drift_scale, size=n_patients)
	steps = drift[:, None] + rng.normal(scale=options.latent_noise, size=(n_patients, hours - 1))
	return start[:, None] + np.concatenate([np.zeros((n_patients, 1)), np.cumsum(steps, axis=1)], axis=1)


def _ar_noise(rng, n_patients: int, hours: int, phi: float) -> np.ndarray:
	shocks = rng.normal(size=(n_patients, hours))
	out = np.empty_like(shocks)
	out[:, 0] = shocks[:, 0]
	scale = np.sqrt(1.0 - phi * phi)
	for t in range(1, hours):
		out[:, t] = phi * out[:, t - 1] + scale * shocks[:, t]
	return out


def _threshold_labels(rng, score: np.ndarray, label_noise: float) -> tuple[np.ndarray, float]:
	threshold = float(np.median(score))
	if label_noise > 0:
		labels = (rng.uniform(size=score.shape) < expit((score - threshold) / label_noise)).astype(int)
	else:
		labels = (score > threshold).astype(int)
	return labels, threshold


def generate_cohort(
	n_patients: int,
	n_features: int,
	relevant,
	seed: int,
	window: WindowSpec | None = None,
	options: SynthOptions | None = None,
) -> Cohort:
	window = window or WindowSpec()
	options = options or SynthOptions()
	if n_patients < 1 or n_features < 1:
		raise ConfigError("n_patients and n_features must be positive")
	relevant = validate_relevant(relevant, n_features)
	relevant_alt = validate_relevant(options.relevant_alt, n_features, "relevant_alt") if options.relevant_alt else ()
	if set(relevant) & set(relevant_alt):
		raise ConfigError("relevant and relevant_alt sets must be disjoint")

	hours = options.record_hours or max(window.label_end, window.grid_steps)
	if hours < max(window.label_end, window.grid_steps):
		raise ConfigError(f"record_hours={hours} shorter than the label or forecast window")

	latent = _latent(RngStream(seed, "synth_latent").generator(), n_patients, hours, options)
	latent_alt = _latent(RngStream(seed, "synth_latent_alt").generator(), n_patients, hours, options)

	channel_rng = RngStream(seed, "synth_channels").generator()
	loadings = channel_rng.uniform(0.5, 1.5, size=n_features)
	offsets = options.offset + channel_rng.uniform(0.0, 2.0, size=n_features)
	missingness = channel_rng.uniform(0.0, options.missingness_spread, size=n_features)

	noise_rng = RngStream(seed, "synth_noise").generator()
	signal = np.stack(
		[_ar_noise(noise_rng, n_patients, hours, options.ar_coefficient) for _ in range(n_features)], axis=2
	)
	for f in relevant:
		signal[:, :, f] = loadings[f] * latent
	for f in relevant_alt:
		signal[:, :, f] = loadings[f] * latent_alt

	measure_rng = RngStream(seed, "synth_measure").generator()
	values = offsets[None, None, :] + signal
	if options.measurement_noise > 0:
		values = values + measure_rng.normal(scale=options.measurement_noise, size=values.shape)
	observe_rng = RngStream(seed, "synth_observe").generator()
	observed = observe_rng.uniform(size=values.shape) < options.observation_density * (1.0 - missingness)
	offsets_in_hour = observe_rng.uniform(size=values.shape)

	patient_ids = np.array([f"p{i:06d}" for i in range(n_patients)])
	p_idx, hour, feature = np.nonzero(observed)
	events = pd.DataFrame(
		{
			"patient_id": patient_ids[p_idx],
			"time_hours": hour + offsets_in_hour[p_idx, hour, feature],
			"feature_id": feature.astype(np.int64),
			"value": values[p_idx, hour, feature],
		},
		columns=EVENT_COLUMNS,
	)

	label_rng = RngStream(seed, "synth_labels").generator()
	span = slice(window.label_start, window.label_end)
	scores = {
		TASK_PRIMARY: latent[:, span].mean(axis=1),
		TASK_TREND: latent[:, window.label_end - 1] - latent[:, window.label_start],
	}
	if relevant_alt:
		scores[TASK_ALT] = latent_alt[:, span].mean(axis=1)

	label_frames, thresholds = [], {}
	for task, score in scores.items():
		labels, thresholds[task] = _threshold_labels(label_rng, score, options.label_noise)
		label_frames.append(pd.DataFrame({"patient_id": patient_ids, "task": task, "label": labels}))
	label_table = pd.concat(label_frames, ignore_index=True)[LABEL_COLUMNS]

	manifest = {
		"seed": int(seed),
		"n_patients": int(n_patients),
		"n_features": int(n_features),
		"relevant": list(relevant),
		"relevant_alt": list(relevant_alt),
		"record_hours": int(hours),
		"thresholds": thresholds,
		"n_events": int(len(events)),
		"options": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(options).items()},
	}
	logger.info(
		"generated %d patients, %d channels, %d events (S=%s)", n_patients, n_features, len(events), list(relevant)
	)
	lengths = pd.Series(float(hours), index=pd.Index(patient_ids, name="patient_id"), name="length_hours")
	return Cohort(events, label_table, n_features, lengths, manifest)


def write_cohort_csv(cohort: Cohort, directory: str | Path) -> dict[str, Path]:
	directory = Path(directory)
	directory.mkdir(parents=True, exist_ok=True)
	paths = {"events": directory / "events.csv", "labels": directory / "labels.csv"}
	cohort.events.to_csv(paths["events"], index=False, columns=EVENT_COLUMNS, lineterminator="\n")

	labels = cohort.labels.copy()
	labels["label"] = labels["label"].map({1: "1", 0: "0", -1: "excluded"})
	labels.to_csv(paths["labels"], index=False, columns=LABEL_COLUMNS, lineterminator="\n")

	if cohort.manifest is not None:
		paths["manifest"] = directory / "manifest.yaml"
		paths["manifest"].write_text(yaml.safe_dump(cohort.manifest, sort_keys=True), encoding="utf-8")
	return paths

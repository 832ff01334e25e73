# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Hash-based cross-validation splits.

Each patient id maps to u = fmix64(fnv1a64(id)) / 2**64; the finalizer keeps
sequential ids such as p000001, p000002 from clustering. Fold f shifts u to
(u + f / n_folds) mod 1 and cuts [0, 1) at the role proportions, so with ten
folds and a 10% test share every patient is tested exactly once.
"""

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from autoselect.exceptions import ConfigError
from autoselect.numcore.rng import id_hash

ROLES = ("train", "val", "test")


def hash_unit(patient_id: str) -> float:
	return id_hash(patient_id) / 2.0**64


@dataclass(frozen=True)
class SplitAssignment:
	patient_ids: tuple[str, ...]
	units: tuple[float, ...]
	n_folds: int
	proportions: tuple[float, float, float]

	def shifted(self, fold: int) -> np.ndarray:
		if not 0 <= fold < self.n_folds:
			raise ConfigError(f"fold {fold} outside 0..{self.n_folds - 1}")
		return np.mod(np.asarray(self.units) + fold / self.n_folds, 1.0)

	def roles(self, fold: int) -> np.ndarray:
		u = self.shifted(fold)
		train, val, _ = self.proportions
		return np.where(u < train, "train", np.where(u < train + val, "val", "test"))

	def members(self, fold: int, role: str) -> list[str]:
		if role not in ROLES:
			raise ConfigError(f"unknown role {role}")
		ids = np.asarray(self.patient_ids)
		return ids[self.roles(fold) == role].tolist()

	def validation_halves(self, fold: int) -> tuple[list[str], list[str]]:
		"""(meta-val, stop-val): the lower and upper halves of the val interval."""
		u = self.shifted(fold)
		train, val, _ = self.proportions
		ids = np.asarray(self.patient_ids)
		in_val = (u >= train) & (u < train + val)
		lower = u < train + val / 2.0
		return ids[in_val & lower].tolist(), ids[in_val & ~lower].tolist()

	def frame(self, fold: int) -> pd.DataFrame:
		return pd.DataFrame({"patient_id": self.patient_ids, "fold": fold, "role": self.roles(fold)})


def assign_splits(patient_ids, n_folds: int = 10, proportions=(0.8, 0.1, 0.1)) -> SplitAssignment:
	patient_ids = tuple(str(pid) for pid in patient_ids)
	if len(set(patient_ids)) != len(patient_ids):
		seen, dupes = set(), []
		for pid in patient_ids:
			if pid in seen:
				dupes.append(pid)
			seen.add(pid)
		raise ConfigError(f"duplicate patient ids: {dupes[:5]}")
	if n_folds < 1:
		raise ConfigError("n_folds must be at least 1")
	proportions = tuple(float(p) for p in proportions)
	if len(proportions) != 3 or min(proportions) < 0 or proportions[0] == 0:
		raise ConfigError(f"invalid split proportions {proportions}")
	if not math.isclose(sum(proportions), 1.0, abs_tol=1e-9):
		raise ConfigError(f"split proportions sum to {sum(proportions)}, not 1")
	units = tuple(hash_unit(pid) for pid in patient_ids)
	return SplitAssignment(patient_ids, units, n_folds, proportions)


def fraction_order(patient_ids) -> list[str]:
	"""Deterministic order for data-fraction prefixes, independent of fold hashing."""
	return sorted(patient_ids, key=lambda pid: (id_hash("fraction:" + pid), pid))


def fraction_subset(patient_ids, fraction: float) -> list[str]:
	"""First ceil(fraction * n) ids of ``fraction_order``; nested in ``fraction``."""
	if not 0 < fraction <= 1:
		raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
	ordered = fraction_order(patient_ids)
	if not ordered:
		return []
	return ordered[: max(1, math.ceil(fraction * len(ordered) - 1e-9))]

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

DYNAMICS_COLUMNS = ["step", "split", "metric", "value"]


@dataclass
class DynamicsLog:
	"""Long-format training curves: one row per (step, split, metric)."""

	rows: list[tuple[int, str, str, float]] = field(default_factory=list)

	def add(self, step: int, split: str, metric: str, value: float):
		self.rows.append((int(step), split, metric, float(value)))

	def to_frame(self) -> pd.DataFrame:
		return pd.DataFrame(self.rows, columns=DYNAMICS_COLUMNS)

	def write_csv(self, path: str | Path) -> Path:
		path = Path(path)
		self.to_frame().to_csv(path, index=False, lineterminator="\n")
		return path

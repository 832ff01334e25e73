# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import numpy as np
from numpy.typing import NDArray

Tensor = NDArray[np.float64]


def inf_norm(tensors: list[Tensor]) -> float:
	return max((float(np.max(np.abs(t))) for t in tensors if t.size), default=0.0)


def flatten(tensors: list[Tensor]) -> Tensor:
	if not tensors:
		return np.zeros(0)
	return np.concatenate([np.ravel(t) for t in tensors])

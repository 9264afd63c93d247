# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

from typing import List, Sequence, Union

import numpy as np

from fex.commons.errors import DimensionError, PreconditionError
from fex.models.core import Attribution, Mask

EPS_CLAMP = 1e-4

Seed = Union[None, int, Sequence[int], np.random.Generator]

def clamp_probs(values: np.ndarray) -> np.ndarray:
	return np.clip(values, EPS_CLAMP, 1.0 - EPS_CLAMP)

def as_generator(seed: Seed) -> np.random.Generator:
	if isinstance(seed, np.random.Generator):
		return seed
	return np.random.default_rng(seed)

def log_prob_rows(lam: np.ndarray, masks: np.ndarray) -> np.ndarray:
	"""log q(m) for mask rows (..., N) under means lam (..., N), broadcasting"""
	return np.where(masks == 1, np.log(lam), np.log1p(-lam)).sum(axis=-1)

def score_rows(lam: np.ndarray, masks: np.ndarray) -> np.ndarray:
	"""d log q(m) / d lam for mask rows"""
	return np.where(masks == 1, 1.0 / lam, -1.0 / (1.0 - lam))

def entropy_rows(lam: np.ndarray) -> np.ndarray:
	return -(lam * np.log(lam) + (1.0 - lam) * np.log1p(-lam)).sum(axis=-1)

def entropy_gradient_rows(lam: np.ndarray) -> np.ndarray:
	return np.log1p(-lam) - np.log(lam)

class BernoulliPolicy:
	"""
	Product of independent Bernoulli variables with mean vector lambda,
	clamped to [EPS_CLAMP, 1 - EPS_CLAMP] so that log-probabilities stay
	finite. Immutable; sampling takes a caller-owned generator or seed.
	"""

	def __init__(self, lam: Sequence[float]) -> None:
		arr = np.array(lam, dtype=np.float64)
		if arr.ndim != 1 or not arr.size:
			raise DimensionError(f"Policy means must be a non-empty vector, got shape {arr.shape}")
		if not np.all(np.isfinite(arr)):
			raise PreconditionError(f"Policy means must be finite: {arr.tolist()}")
		self.lam = clamp_probs(arr)
		self.lam.setflags(write=False)

	@property
	def n_features(self) -> int:
		return len(self.lam)

	def _check(self, mask: Mask) -> None:
		if len(mask) != self.n_features:
			raise DimensionError(
				f"Mask length {len(mask)} does not match policy width {self.n_features}"
			)

	def sample_matrix(self, t: int, seed: Seed = None) -> np.ndarray:
		if t < 1:
			raise PreconditionError(f"Need at least one mask, got t={t}")
		rng = as_generator(seed)
		return (rng.random((t, self.n_features)) < self.lam).astype(np.int8)

	def sample_masks(self, t: int, seed: Seed = None) -> List[Mask]:
		return [Mask(row) for row in self.sample_matrix(t, seed)]

	def log_prob(self, mask: Mask) -> float:
		self._check(mask)
		return float(log_prob_rows(self.lam, mask.bits))

	def score(self, mask: Mask) -> np.ndarray:
		self._check(mask)
		return score_rows(self.lam, mask.bits)

	def entropy(self) -> float:
		return float(entropy_rows(self.lam))

	def entropy_gradient(self) -> np.ndarray:
		return entropy_gradient_rows(self.lam)

	def mean(self) -> Attribution:
		return Attribution(self.lam, normalized=True)

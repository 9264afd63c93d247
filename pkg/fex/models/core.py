# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from fex.commons.errors import DimensionError, PreconditionError
from .base import BaseModel

Vector = Union[Sequence[float], np.ndarray]

def _frozen(values: Any, dtype: Any) -> np.ndarray:
	arr = np.array(values, dtype=dtype)
	if arr.ndim != 1:
		raise DimensionError(f"Expected a flat vector, got shape {arr.shape}")
	arr.setflags(write=False)
	return arr

class Mask(BaseModel):
	"""Binary feature selection vector; index i selects feature i"""

	def __init__(self, bits: Vector) -> None:
		arr = np.asarray(bits)
		if arr.size and not np.all((arr == 0) | (arr == 1)):
			raise PreconditionError(f"Mask entries must be 0 or 1: {arr.tolist()}")
		self.bits = _frozen(arr, np.int8)

	@classmethod
	def from_int(cls, value: int, n: int) -> "Mask":
		"""Feature 0 is the least significant bit"""
		return cls([(value >> i) & 1 for i in range(n)])

	def to_int(self) -> int:
		return sum(1 << i for i, b in enumerate(self.bits) if b)

	def __len__(self) -> int:
		return len(self.bits)

	def __eq__(self, o: Any) -> bool:
		return isinstance(o, Mask) and np.array_equal(self.bits, o.bits)

	def __hash__(self) -> int:
		return hash((len(self.bits), self.bits.tobytes()))

	def __repr__(self) -> str:
		return f"Mask({''.join(str(int(b)) for b in self.bits)})"

	def encode(self) -> List[int]:
		return self.bits.tolist()


class Sample(BaseModel):
	def __init__(
		self,
		features: Optional[Vector] = None,
		label: Optional[int] = None
	) -> None:
		self.features = _frozen(features if features is not None else [], np.float64)
		self.label = None if label is None else int(label)

	@property
	def n_features(self) -> int:
		return len(self.features)

	def __eq__(self, o: Any) -> bool:
		return (
			isinstance(o, Sample)
			and self.label == o.label
			and np.array_equal(self.features, o.features)
		)

	def encode(self) -> Dict[str, Any]:
		return {"features": self.features.tolist(), "label": self.label}


class Attribution(BaseModel):
	"""
	Non-negative feature importance vector. When `normalized` is set, the
	values are expectations of {0,1} coordinates and therefore lie in [0,1].
	"""

	TOLERANCE = 1e-9

	def __init__(
		self,
		values: Optional[Vector] = None,
		normalized: bool = False
	) -> None:
		self.values = _frozen(values if values is not None else [], np.float64)
		self.normalized = bool(normalized)
		if np.any(self.values < -Attribution.TOLERANCE):
			raise PreconditionError(f"Attribution values must be >= 0: {self.values.tolist()}")
		if normalized and np.any(self.values > 1 + Attribution.TOLERANCE):
			raise PreconditionError(f"Normalized attribution values must be <= 1: {self.values.tolist()}")

	def __len__(self) -> int:
		return len(self.values)

	def ranking(self, descending: bool = True) -> np.ndarray:
		"""Feature indices by importance; ties are broken by ascending feature index"""
		index = np.arange(len(self.values))
		key = -self.values if descending else self.values
		return np.lexsort((index, key))

	def top_k(self, k: int) -> List[int]:
		return self.ranking()[:k].tolist()

	def argmax(self) -> int:
		return int(self.ranking()[0])

	def encode(self) -> Dict[str, Any]:
		return {"values": self.values.tolist(), "normalized": self.normalized}


class ProbVector(BaseModel):

	TOLERANCE = 1e-9

	def __init__(self, probs: Optional[Vector] = None) -> None:
		self.probs = _frozen(probs if probs is not None else [], np.float64)
		if not self.probs.size:
			raise DimensionError("Probability vector must not be empty")
		if np.any(self.probs < 0) or abs(float(self.probs.sum()) - 1.0) > ProbVector.TOLERANCE:
			raise PreconditionError(f"Not a probability vector: {self.probs.tolist()}")

	def __len__(self) -> int:
		return len(self.probs)

	def __getitem__(self, k: int) -> float:
		return float(self.probs[k])

	def argmax(self) -> int:
		return int(np.argmax(self.probs))

	def encode(self) -> List[float]:
		return self.probs.tolist()

# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

from typing import Iterator, Optional

import numpy as np

from fex.commons.errors import CapacityError, DimensionError
from fex.commons.settings import Settings
from fex.models.core import Mask, Sample

def apply_mask(mask: Mask, x: Sample) -> Sample:
	"""Elementwise product m*x; masked positions become exactly 0.0"""
	if len(mask) != x.n_features:
		raise DimensionError(
			f"Mask length {len(mask)} does not match {x.n_features} features"
		)
	return Sample(np.where(mask.bits == 1, x.features, 0.0), x.label)

def retained_count(mask: Mask) -> int:
	return int(np.count_nonzero(mask.bits))

def check_enumerable(n: int, limit: Optional[int] = None) -> None:
	limit = Settings.MAX_ORACLE_FEATURES if limit is None else limit
	if n < 1 or n > limit:
		raise CapacityError(
			f"Cannot enumerate masks over {n} features (allowed: 1..{limit})"
		)

def masks_from_codes(codes: np.ndarray, n: int) -> np.ndarray:
	"""One mask row per integer code; feature 0 is the least significant bit"""
	codes = np.asarray(codes, dtype=np.int64)
	return ((codes[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int8)

def mask_block(n: int, start: int, stop: int) -> np.ndarray:
	"""Masks whose integer codes lie in [start, stop), in ascending order"""
	return masks_from_codes(np.arange(start, stop, dtype=np.int64), n)

def enumerate_nonzero_masks(n: int, limit: Optional[int] = None) -> Iterator[Mask]:
	check_enumerable(n, limit)
	block = 4096
	total = 1 << n
	for start in range(1, total, block):
		for row in mask_block(n, start, min(start + block, total)):
			yield Mask(row)

# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

"""
Exact empirical attribution by enumerating every non-empty mask, the
induced mask distribution p(m|x) = c(m, x) / A(x), and a uniform Monte
Carlo estimator of the same attribution.
"""

import logging
from multiprocessing.pool import ThreadPool
from typing import Dict, List, Optional, Tuple

import numpy as np

from fex.commons.errors import CapacityError, DimensionError, FexError, PreconditionError
from fex.commons.masking import check_enumerable, mask_block, masks_from_codes
from fex.commons.policy import BernoulliPolicy, Seed, log_prob_rows
from fex.commons.predictor import Predictor, naive_scores
from fex.commons.settings import Settings
from fex.models.core import Attribution, Mask, Sample
from fex.models.reports import OracleReport

logger = logging.getLogger(__name__)

BLOCK_SIZE = 4096

class OracleError(FexError):
	category = "normalization"

def _check(p: Predictor, x: Sample, class_index: int) -> int:
	n = x.n_features
	if n != p.n_features:
		raise DimensionError(f"Sample has {n} features, predictor expects {p.n_features}")
	check_enumerable(n)
	p.check_class(class_index)
	return n

def _ranges(n: int, block_size: int) -> List[Tuple[int, int]]:
	total = 1 << n
	return [
		(start, min(start + block_size, total))
		for start in range(1, total, block_size)
	]

def empirical_attribution(
	p: Predictor,
	x: Sample,
	class_index: int,
	threads: Optional[int] = None,
	block_size: int = BLOCK_SIZE
) -> OracleReport:
	"""
	phi_i = sum over masks with m_i = 1 of f_k(m*x) / K_m, and A(x) the same
	sum over all non-empty masks. Mask ranges are evaluated in blocks,
	optionally on a thread pool, and reduced in ascending block order.
	"""
	n = _check(p, x, class_index)
	ranges = _ranges(n, block_size)
	threads = Settings.THREADS if threads is None else threads

	def block(bounds: Tuple[int, int]) -> Tuple[np.ndarray, float]:
		masks = mask_block(n, *bounds)
		scores = naive_scores(p, masks, x.features, class_index)
		return scores @ masks, float(scores.sum())

	if threads > 1 and p.thread_safe and len(ranges) > 1:
		with ThreadPool(min(threads, len(ranges))) as tpool:
			parts = tpool.map(block, ranges)
	else:
		parts = [block(r) for r in ranges]

	phi = np.zeros(n)
	normalization = 0.0
	for part_phi, part_norm in parts:
		phi += part_phi
		normalization += part_norm

	if not normalization > 0.0:
		raise OracleError(
			f"Class {class_index} has zero score on every mask; A(x) = {normalization}"
		)
	logger.debug(f"Oracle over {(1 << n) - 1} masks: A(x) = {normalization:.6g}")
	return OracleReport(
		Attribution(phi),
		normalization,
		Attribution(np.minimum(phi / normalization, 1.0), normalized=True),
		(1 << n) - 1,
		class_index
	)

def exact_mask_distribution(p: Predictor, x: Sample, class_index: int) -> Dict[Mask, float]:
	n = _check(p, x, class_index)
	masks = mask_block(n, 1, 1 << n)
	scores = naive_scores(p, masks, x.features, class_index)
	normalization = scores.sum()
	if not normalization > 0.0:
		raise OracleError(f"Class {class_index} has zero score on every mask")
	return {
		Mask(row): float(prob) for row, prob in zip(masks, scores / normalization)
	}

def expected_score(policy: BernoulliPolicy, p: Predictor, x: Sample, class_index: int) -> float:
	"""E_q[c(m, x)] by enumeration of all 2^N masks (the empty mask scores 0)"""
	n = _check(p, x, class_index)
	if policy.n_features != n:
		raise DimensionError(f"Policy width {policy.n_features} does not match {n} features")
	masks = mask_block(n, 0, 1 << n)
	weights = np.exp(log_prob_rows(policy.lam, masks))
	return float(weights @ naive_scores(p, masks, x.features, class_index))

def monte_carlo_attribution(
	p: Predictor,
	x: Sample,
	class_index: int,
	n_samples: int,
	seed: Seed = None
) -> Attribution:
	"""
	Unbiased estimate ((2^N - 1) / S) * sum_s m_s * c(m_s, x), masks drawn
	uniformly from the non-empty masks. Costs exactly S predictor queries.
	"""
	if n_samples < 1:
		raise PreconditionError(f"Monte Carlo needs at least one sample, got {n_samples}")
	n = x.n_features
	if n != p.n_features:
		raise DimensionError(f"Sample has {n} features, predictor expects {p.n_features}")
	if n > 62:
		raise CapacityError(f"Cannot draw uniform masks over {n} features")
	rng = np.random.default_rng(seed)
	masks = masks_from_codes(rng.integers(1, 1 << n, size=n_samples), n)
	scores = naive_scores(p, masks, x.features, class_index)
	return Attribution(((1 << n) - 1) / n_samples * (scores @ masks))

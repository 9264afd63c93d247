# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

import math
import unittest

import numpy as np

from fex.commons.errors import DimensionError, PreconditionError
from fex.commons.masking import mask_block
from fex.commons.policy import EPS_CLAMP, BernoulliPolicy, log_prob_rows
from fex.models.core import Mask

class TestingPolicy(unittest.TestCase):

	def test_clamping(self):
		pol = BernoulliPolicy([0.0, 1.0, 0.3])
		self.assertEqual(pol.lam.tolist(), [EPS_CLAMP, 1.0 - EPS_CLAMP, 0.3])
		self.assertTrue(math.isfinite(pol.log_prob(Mask([1, 0, 1]))))

	def test_log_prob(self):
		self.assertAlmostEqual(BernoulliPolicy([0.5, 0.5]).log_prob(Mask([1, 0])), math.log(0.25), places=12)
		self.assertAlmostEqual(BernoulliPolicy([0.9, 0.1]).log_prob(Mask([1, 0])), 2 * math.log(0.9), places=12)
		with self.assertRaises(DimensionError):
			BernoulliPolicy([0.5, 0.5]).log_prob(Mask([1]))

	def test_total_mass(self):
		lam = np.random.default_rng(0).uniform(0.05, 0.95, size=12)
		masks = mask_block(12, 0, 1 << 12)
		self.assertAlmostEqual(float(np.exp(log_prob_rows(lam, masks)).sum()), 1.0, delta=1e-9)

	def test_entropy(self):
		self.assertAlmostEqual(BernoulliPolicy([0.5] * 4).entropy(), 4 * math.log(2), places=12)
		self.assertLessEqual(BernoulliPolicy([EPS_CLAMP]).entropy(), 0.0011)
		pol = BernoulliPolicy(np.random.default_rng(1).uniform(0.1, 0.9, size=8))
		masks = mask_block(8, 0, 1 << 8)
		logq = log_prob_rows(pol.lam, masks)
		self.assertAlmostEqual(pol.entropy(), float(-(np.exp(logq) * logq).sum()), delta=1e-9)

	def test_mean(self):
		self.assertEqual(BernoulliPolicy([0.2, 0.8]).mean().values.tolist(), [0.2, 0.8])
		pol = BernoulliPolicy(np.random.default_rng(2).uniform(0.05, 0.95, size=10))
		masks = mask_block(10, 0, 1 << 10)
		expected = np.exp(log_prob_rows(pol.lam, masks)) @ masks
		np.testing.assert_allclose(pol.mean().values, expected, atol=1e-9)
		self.assertTrue(pol.mean().normalized)

	def test_equal_means_rank_by_index(self):
		self.assertEqual(BernoulliPolicy([0.4] * 3).mean().ranking().tolist(), [0, 1, 2])

	def test_score_matches_finite_differences(self):
		rng = np.random.default_rng(3)
		for _ in range(20):
			lam = rng.uniform(0.2, 0.8, size=5)
			mask = Mask(rng.integers(0, 2, size=5))
			score = BernoulliPolicy(lam).score(mask)
			for i in range(5):
				plus, minus = lam.copy(), lam.copy()
				plus[i] += 1e-6
				minus[i] -= 1e-6
				numeric = (BernoulliPolicy(plus).log_prob(mask) - BernoulliPolicy(minus).log_prob(mask)) / 2e-6
				self.assertLessEqual(abs(score[i] - numeric) / abs(numeric), 1e-6)

	def test_near_deterministic_sampling(self):
		ones = BernoulliPolicy([1.0] * 6).sample_matrix(200, seed=0)
		zeros = BernoulliPolicy([0.0] * 6).sample_matrix(200, seed=0)
		self.assertGreaterEqual(ones.mean(), 0.99)
		self.assertLessEqual(zeros.mean(), 0.01)

	def test_sampling_statistics(self):
		draws = BernoulliPolicy([0.5] * 5).sample_matrix(10000, seed=4)
		np.testing.assert_allclose(draws.mean(axis=0), 0.5, atol=0.02)
		corr = np.corrcoef(draws.T.astype(np.float64))
		self.assertLessEqual(np.abs(corr - np.eye(5)).max(), 0.05)

	def test_sampling_seeded(self):
		pol = BernoulliPolicy([0.3, 0.6, 0.5])
		self.assertEqual(pol.sample_masks(8, seed=[1, 2]), pol.sample_masks(8, seed=[1, 2]))
		self.assertEqual(len(pol.sample_masks(1, seed=0)), 1)
		with self.assertRaises(PreconditionError):
			pol.sample_masks(0, seed=0)

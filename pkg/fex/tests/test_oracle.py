# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

import unittest

import numpy as np

from fex.commons.errors import CapacityError, PreconditionError
from fex.commons.oracle import (OracleError, empirical_attribution, exact_mask_distribution,
                                expected_score, monte_carlo_attribution)
from fex.commons.policy import BernoulliPolicy
from fex.models.core import Mask, Sample
from fex.tests.fixtures import constant_predictor, first_feature_predictor, random_builtin

class TestingEmpiricalAttribution(unittest.TestCase):

	def test_constant_function(self):
		report = empirical_attribution(constant_predictor(2, [1.0]), Sample([0.3, 0.4]), 0, threads=1)
		self.assertEqual(report.phi.values.tolist(), [1.5, 1.5])
		self.assertEqual(report.normalization, 2.5)
		np.testing.assert_allclose(report.normalized_phi.values, [0.6, 0.6], atol=1e-12)
		self.assertEqual(report.n_masks_evaluated, 3)
		self.assertEqual(report.class_index, 0)

	def test_first_feature_function(self):
		report = empirical_attribution(first_feature_predictor(2), Sample([1.0, 1.0]), 0, threads=1)
		np.testing.assert_allclose(report.phi.values, [1.5, 0.5], atol=1e-12)
		self.assertAlmostEqual(report.normalization, 1.5, places=12)
		np.testing.assert_allclose(report.normalized_phi.values, [1.0, 1.0 / 3.0], atol=1e-12)

	def test_single_feature(self):
		report = empirical_attribution(constant_predictor(1, [0.3, 0.7]), Sample([2.0]), 0, threads=1)
		self.assertAlmostEqual(report.phi.values[0], 0.3, places=12)
		self.assertAlmostEqual(report.normalization, 0.3, places=12)
		self.assertAlmostEqual(report.normalized_phi.values[0], 1.0, places=12)

	def test_constant_symmetry(self):
		report = empirical_attribution(constant_predictor(6, [0.2, 0.8]), Sample(np.arange(6.0)), 1, threads=1)
		self.assertLessEqual(np.ptp(report.phi.values), 1e-12)

	def test_ignored_feature_scores_lower(self):
		report = empirical_attribution(first_feature_predictor(3), Sample([0.9, 0.5, 0.5]), 0, threads=1)
		self.assertLess(report.phi.values[1], report.phi.values[0])
		self.assertLess(report.phi.values[2], report.phi.values[0])

	def test_threads_match_single_thread(self):
		p = random_builtin(10, 3, seed=5)
		x = Sample(np.random.default_rng(5).uniform(size=10))
		single = empirical_attribution(p, x, 2, threads=1, block_size=64)
		pooled = empirical_attribution(p, x, 2, threads=4, block_size=64)
		np.testing.assert_allclose(pooled.phi.values, single.phi.values, atol=1e-9)
		self.assertAlmostEqual(pooled.normalization, single.normalization, delta=1e-9)

	def test_errors(self):
		with self.assertRaises(CapacityError):
			empirical_attribution(constant_predictor(21, [1.0]), Sample(np.zeros(21)), 0)
		with self.assertRaises(OracleError) as ctx:
			empirical_attribution(constant_predictor(2, [0.0, 1.0]), Sample([1.0, 1.0]), 0, threads=1)
		self.assertEqual(ctx.exception.category, "normalization")


class TestingMaskDistribution(unittest.TestCase):

	def test_constant_function(self):
		dist = exact_mask_distribution(constant_predictor(2, [1.0]), Sample([1.0, 1.0]), 0)
		self.assertAlmostEqual(dist[Mask([1, 0])], 0.4, places=12)
		self.assertAlmostEqual(dist[Mask([0, 1])], 0.4, places=12)
		self.assertAlmostEqual(dist[Mask([1, 1])], 0.2, places=12)
		self.assertNotIn(Mask([0, 0]), dist)

	def test_zero_mass(self):
		dist = exact_mask_distribution(first_feature_predictor(2), Sample([1.0, 1.0]), 0)
		self.assertEqual(dist[Mask([0, 1])], 0.0)

	def test_expectation_identity(self):
		rng = np.random.default_rng(7)
		for trial, n in enumerate(range(3, 11)):
			p = random_builtin(n, 2, seed=trial)
			x = Sample(rng.uniform(size=n))
			dist = exact_mask_distribution(p, x, 1)
			self.assertAlmostEqual(sum(dist.values()), 1.0, delta=1e-9)
			expectation = sum(prob * m.bits for m, prob in dist.items())
			report = empirical_attribution(p, x, 1, threads=1)
			np.testing.assert_allclose(expectation, report.normalized_phi.values, atol=1e-9)


class TestingMonteCarlo(unittest.TestCase):

	def test_converges_to_oracle(self):
		phi = monte_carlo_attribution(constant_predictor(2, [1.0]), Sample([1.0, 1.0]), 0, 10000, seed=0)
		np.testing.assert_allclose(phi.values, [1.5, 1.5], atol=0.05)

	def test_single_draw(self):
		p = constant_predictor(2, [1.0])
		phi = monte_carlo_attribution(p, Sample([1.0, 1.0]), 0, 1, seed=3)
		self.assertIn(phi.values.tolist(), [[3.0, 0.0], [0.0, 3.0], [1.5, 1.5]])
		self.assertEqual(p.queries, 1)

	def test_unbiased_over_seeds(self):
		p = random_builtin(4, 2, seed=11)
		x = Sample([0.2, 0.9, 0.4, 0.7])
		phi = empirical_attribution(p, x, 0, threads=1).phi.values
		estimates = np.array([
			monte_carlo_attribution(p, x, 0, 50, seed=s).values for s in range(100)
		])
		bound = 4 * estimates.std(axis=0, ddof=1) / np.sqrt(100)
		self.assertTrue(np.all(np.abs(estimates.mean(axis=0) - phi) <= bound))

	def test_needs_samples(self):
		with self.assertRaises(PreconditionError):
			monte_carlo_attribution(constant_predictor(2, [1.0]), Sample([1.0, 1.0]), 0, 0)


class TestingExpectedScore(unittest.TestCase):

	def test_uniform_policy(self):
		score = expected_score(BernoulliPolicy([0.5, 0.5]), constant_predictor(2, [1.0]), Sample([1.0, 1.0]), 0)
		self.assertAlmostEqual(score, 0.625, places=12)

	def test_saturated_policy(self):
		score = expected_score(BernoulliPolicy([1.0] * 3), constant_predictor(3, [1.0]), Sample([1.0] * 3), 0)
		self.assertAlmostEqual(score, 1.0 / 3.0, delta=1e-3)

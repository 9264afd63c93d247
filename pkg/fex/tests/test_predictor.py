# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

import os
import tempfile
import time
import unittest

import numpy as np

from fex.commons.errors import DimensionError
from fex.commons.nnet import MlpNetwork
from fex.commons.predictor import (BridgeError, BuiltinPredictor, PredictorError,
                                   ProtocolError, accuracy, naive_score,
                                   open_blackbox_bridge, train_builtin)
from fex.commons.synthdata import LabeledDataset
from fex.models.core import Mask, Sample
from fex.tests.fixtures import bridge_command, constant_predictor

def separable_dataset(n_samples: int = 400, seed: int = 0) -> LabeledDataset:
	rng = np.random.default_rng(seed)
	features = rng.uniform(0.0, 1.0, size=(n_samples, 4))
	features[:, 0] = np.where(features[:, 0] < 0.5, features[:, 0] * 0.8, 0.6 + (features[:, 0] - 0.5) * 0.8)
	return LabeledDataset(features, (features[:, 0] > 0.5).astype(int), 2)

class TestingBuiltinPredictor(unittest.TestCase):

	def test_zero_network_is_uniform(self):
		p = BuiltinPredictor(MlpNetwork.zeros([3, 4, 2], "softmax"))
		self.assertEqual(p.predict_proba(Sample([0.1, 0.2, 0.3])).probs.tolist(), [0.5, 0.5])
		self.assertEqual(p.queries, 1)

	def test_needs_softmax(self):
		with self.assertRaises(PredictorError):
			BuiltinPredictor(MlpNetwork([3, 2], "sigmoid", seed=0))

	def test_dimension_check(self):
		p = BuiltinPredictor(MlpNetwork([3, 2], "softmax", seed=0))
		with self.assertRaises(DimensionError):
			p.predict_proba(Sample([0.1, 0.2]))
		with self.assertRaises(PredictorError) as ctx:
			p.check_class(2)
		self.assertEqual(ctx.exception.category, "dimension")

	def test_train_separable(self):
		data = separable_dataset()
		p = train_builtin(data, epochs=50, seed=1)
		self.assertGreaterEqual(accuracy(p, data), 0.99)
		self.assertEqual(len(p.training_losses), 50)
		self.assertLess(p.training_losses[-1], p.training_losses[0])

	def test_train_constant_labels(self):
		data = LabeledDataset(np.random.default_rng(2).uniform(size=(100, 3)), np.ones(100, dtype=int), 2)
		p = train_builtin(data, epochs=100, seed=0)
		self.assertGreaterEqual(accuracy(p, data), 0.99)

	def test_train_zero_epochs(self):
		data = separable_dataset(50)
		p = train_builtin(data, epochs=0, seed=3)
		fresh = MlpNetwork([4, 16, 2], "softmax", seed=3)
		self.assertEqual(p.training_losses, [])
		for a, b in zip(p.network.parameters(), fresh.parameters()):
			np.testing.assert_array_equal(a, b)

	def test_train_empty(self):
		with self.assertRaises(PredictorError):
			train_builtin(LabeledDataset(np.zeros((0, 3)), [], 2))


class TestingNaiveScore(unittest.TestCase):

	def test_examples(self):
		p = constant_predictor(3, [0.6, 0.4])
		x = Sample([0.5, 0.5, 0.5])
		self.assertAlmostEqual(naive_score(p, Mask([1, 1, 1]), x, 0), 0.2, places=12)
		self.assertEqual(naive_score(p, Mask([0, 0, 0]), x, 0), 0.0)
		self.assertEqual(p.queries, 1)
		p = constant_predictor(3, [0.5, 0.5])
		self.assertEqual(naive_score(p, Mask([0, 1, 0]), x, 1), 0.5)

	def test_errors(self):
		p = constant_predictor(3, [0.6, 0.4])
		with self.assertRaises(DimensionError):
			naive_score(p, Mask([1, 1]), Sample([1.0, 1.0, 1.0]), 0)
		with self.assertRaises(PredictorError):
			naive_score(p, Mask([1, 1, 1]), Sample([1.0, 1.0, 1.0]), 5)


class TestingBridgePredictor(unittest.TestCase):

	def setUp(self):
		self.tmp = tempfile.TemporaryDirectory()

	def tearDown(self):
		self.tmp.cleanup()

	def test_constant_child(self):
		command = bridge_command(self.tmp.name, 3, 2, probs=[0.3, 0.7])
		with open_blackbox_bridge(command, timeout=30) as p:
			self.assertEqual((p.n_features, p.n_classes), (3, 2))
			self.assertFalse(p.thread_safe)
			probs = p.predict_proba(Sample([0.1, 0.2, 0.3]))
			np.testing.assert_allclose(probs.probs, [0.3, 0.7], atol=1e-12)
			self.assertEqual(p.queries, 1)

	def test_single_class(self):
		with open_blackbox_bridge(bridge_command(self.tmp.name, 2, 1), timeout=30) as p:
			self.assertEqual(p.predict_proba(Sample([1.0, 2.0])).probs.tolist(), [1.0])

	def test_garbage_response(self):
		with open_blackbox_bridge(bridge_command(self.tmp.name, 2, 2, "garbage"), timeout=30) as p:
			with self.assertRaises(ProtocolError) as ctx:
				p.predict_proba(Sample([1.0, 2.0]))
		self.assertIn("line 2", str(ctx.exception))
		self.assertEqual(ctx.exception.category, "protocol")

	def test_invalid_utf8_response(self):
		with open_blackbox_bridge(bridge_command(self.tmp.name, 2, 2, "badutf8"), timeout=30) as p:
			start = time.monotonic()
			with self.assertRaises(ProtocolError) as ctx:
				p.predict_proba(Sample([1.0, 2.0]))
			self.assertLess(time.monotonic() - start, 10)
		self.assertIn("line 2", str(ctx.exception))
		self.assertIn("UTF-8", str(ctx.exception))

	def test_float_response_id(self):
		with open_blackbox_bridge(bridge_command(self.tmp.name, 2, 2, "floatid"), timeout=30) as p:
			with self.assertRaises(ProtocolError) as ctx:
				p.predict_proba(Sample([1.0, 2.0]))
		self.assertIn("line 2", str(ctx.exception))

	def test_bad_handshake(self):
		with self.assertRaises(ProtocolError):
			open_blackbox_bridge(bridge_command(self.tmp.name, 2, 2, "badhello"), timeout=30)
		with self.assertRaises(ProtocolError) as ctx:
			open_blackbox_bridge(bridge_command(self.tmp.name, 2, 2, "boolhello"), timeout=30)
		self.assertIn("handshake", str(ctx.exception))

	def test_missing_program(self):
		with self.assertRaises(BridgeError):
			open_blackbox_bridge(os.path.join(self.tmp.name, "no-such-program"), timeout=5)

	def test_silent_child_times_out(self):
		p = open_blackbox_bridge(bridge_command(self.tmp.name, 2, 2, "silent"), timeout=30)
		p.timeout = 0.5
		try:
			with self.assertRaises(BridgeError) as ctx:
				p.predict_proba(Sample([1.0, 2.0]))
			self.assertIn("timeout", str(ctx.exception))
		finally:
			p.close()

	@unittest.skipUnless(os.path.isdir("/proc/self/fd"), "needs /proc to count descriptors")
	def test_soak_leaks_no_descriptors(self):
		before = len(os.listdir("/proc/self/fd"))
		with open_blackbox_bridge(bridge_command(self.tmp.name, 4, 2), timeout=30) as p:
			rows = np.random.default_rng(0).uniform(size=(1000, 4))
			probs = p.predict_batch(rows)
			self.assertEqual(probs.shape, (1000, 2))
			self.assertEqual(p.queries, 1000)
		self.assertEqual(len(os.listdir("/proc/self/fd")), before)

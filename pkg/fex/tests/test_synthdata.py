# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

import os
import tempfile
import unittest

import numpy as np

from fex.commons.errors import ParseError
from fex.commons.predictor import accuracy, train_builtin
from fex.commons.synthdata import (DatasetError, gen_planted, gen_two_class_disjoint,
                                   generate, load_csv, meta_path, save_csv)
from fex.models.dataset import DatasetMeta

class TestingGenerators(unittest.TestCase):

	def test_planted_balance(self):
		data = gen_planted(10000, 10, 1, seed=0)
		self.assertTrue(0.45 <= data.labels.mean() <= 0.55)
		self.assertEqual(list(data.ground_truth), [1])
		self.assertEqual(len(data.ground_truth[1]), 1)

	def test_planted_zero_threshold(self):
		data = gen_planted(500, 5, 2, threshold=0.0, seed=1)
		self.assertTrue(np.all(data.labels == 1))

	def test_pure_function_of_seed(self):
		self.assertEqual(gen_planted(100, 6, 2, seed=3), gen_planted(100, 6, 2, seed=3))
		self.assertNotEqual(gen_planted(100, 6, 2, seed=3), gen_planted(100, 6, 2, seed=4))
		a = gen_planted(100, 6, 2, seed=3)
		b = gen_planted(100, 6, 2, seed=3)
		self.assertEqual(a.features.tobytes(), b.features.tobytes())

	def test_planted_range(self):
		with self.assertRaises(DatasetError):
			gen_planted(10, 5, 0)
		with self.assertRaises(DatasetError):
			gen_planted(10, 5, 6)

	def test_disjoint_sets(self):
		for seed in range(10):
			data = gen_two_class_disjoint(50, 8, seed=seed)
			self.assertFalse(set(data.ground_truth[0]) & set(data.ground_truth[1]))

	def test_disjoint_swap(self):
		plain = gen_two_class_disjoint(200, 6, seed=5)
		swapped = gen_two_class_disjoint(200, 6, seed=5, swap=True)
		self.assertEqual(swapped.ground_truth, {0: plain.ground_truth[1], 1: plain.ground_truth[0]})
		np.testing.assert_array_equal(swapped.labels, 1 - plain.labels)

	def test_disjoint_is_learnable(self):
		data = gen_two_class_disjoint(1000, 6, seed=2)
		self.assertGreaterEqual(accuracy(train_builtin(data, epochs=50, seed=2), data), 0.9)

	def test_disjoint_needs_four_features(self):
		with self.assertRaises(DatasetError):
			gen_two_class_disjoint(10, 3)

	def test_generate(self):
		self.assertEqual(len(generate("planted-3", 20, 8).ground_truth[1]), 3)
		self.assertEqual(sorted(generate("two-class-disjoint", 20, 8).ground_truth), [0, 1])
		with self.assertRaises(DatasetError):
			generate("planted-x", 20, 8)
		with self.assertRaises(DatasetError):
			generate("spirals", 20, 8)


class TestingCsv(unittest.TestCase):

	def setUp(self):
		self.tmp = tempfile.TemporaryDirectory()
		self.path = os.path.join(self.tmp.name, "data.csv")

	def tearDown(self):
		self.tmp.cleanup()

	def write(self, text: str) -> None:
		with open(self.path, "w", encoding="utf-8") as f:
			f.write(text)

	def test_round_trip(self):
		data = gen_planted(50, 4, 2, seed=7)
		save_csv(data, self.path)
		self.assertTrue(os.path.isfile(meta_path(self.path)))
		self.assertEqual(load_csv(self.path), data)

	def test_without_metadata(self):
		self.write("f0,f1,label\n0.5,0.25,1\n0.1,0.2,0\n")
		data = load_csv(self.path)
		self.assertEqual((data.n_samples, data.n_features, data.n_classes), (2, 2, 2))
		self.assertEqual(data.labels.tolist(), [1, 0])
		self.assertEqual(data.ground_truth, {})

	def test_empty_row(self):
		self.write("f0,f1,label\n\n0.5,0.25,1\n")
		with self.assertRaises(ParseError) as ctx:
			load_csv(self.path)
		self.assertEqual(ctx.exception.line, 2)
		self.assertIn("line 2", str(ctx.exception))

	def test_short_row(self):
		self.write("f0,f1,label\n0.5,1\n")
		with self.assertRaises(ParseError) as ctx:
			load_csv(self.path)
		self.assertEqual(ctx.exception.line, 2)

	def test_bad_header(self):
		self.write("a,b,label\n0.5,0.25,1\n")
		with self.assertRaises(ParseError) as ctx:
			load_csv(self.path)
		self.assertEqual(ctx.exception.line, 1)

	def test_header_metadata_mismatch(self):
		save_csv(gen_planted(10, 3, 1), self.path)
		DatasetMeta(4, 2).to_file(meta_path(self.path))
		with self.assertRaises(ParseError):
			load_csv(self.path)

	def test_bad_number(self):
		self.write("f0,label\n0.5,1\nabc,0\n")
		with self.assertRaises(ParseError) as ctx:
			load_csv(self.path)
		self.assertEqual(ctx.exception.line, 3)

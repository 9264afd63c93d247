# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

import json
import os
import tempfile
import unittest

import numpy as np

from fex.commons import checkpoint
from fex.commons.checkpoint import CheckpointError
from fex.commons.explainer import ExplainerModel, ValueModel
from fex.models.base import ModelError
from fex.tests.fixtures import random_builtin

class TestingCheckpoint(unittest.TestCase):

	def setUp(self):
		self.tmp = tempfile.TemporaryDirectory()
		self.path = os.path.join(self.tmp.name, "model.ckpt")
		self.rows = np.random.default_rng(0).uniform(-1, 1, size=(7, 4))

	def tearDown(self):
		self.tmp.cleanup()

	def edit(self, change) -> None:
		with open(self.path, encoding="utf-8") as f:
			doc = json.load(f)
		change(doc)
		with open(self.path, "w", encoding="utf-8") as f:
			json.dump(doc, f)

	def test_predictor_round_trip(self):
		p = random_builtin(4, 3, seed=1)
		checkpoint.save(p, self.path, {"epochs": 5}, seed=1)
		loaded = checkpoint.load(self.path, "predictor")
		self.assertEqual(loaded.predict_batch(self.rows).tobytes(), p.predict_batch(self.rows).tobytes())
		self.assertEqual((loaded.n_features, loaded.n_classes), (4, 3))

	def test_explainer_round_trip(self):
		g = ExplainerModel.create(4, 2, [5, 3], seed=2)
		checkpoint.save(g, self.path)
		loaded = checkpoint.load(self.path, "explainer")
		self.assertEqual(loaded.network.layer_sizes, [4, 5, 3, 8])
		self.assertEqual(loaded.lambdas(self.rows)[0].tobytes(), g.lambdas(self.rows)[0].tobytes())

	def test_value_round_trip(self):
		v = ValueModel.create(4, 2, [3], seed=3)
		checkpoint.save(v, self.path)
		self.assertEqual(checkpoint.load(self.path).values(self.rows).tobytes(), v.values(self.rows).tobytes())

	def test_kind_mismatch(self):
		checkpoint.save(ValueModel.create(4, 2, [3], seed=3), self.path)
		with self.assertRaises(CheckpointError) as ctx:
			checkpoint.load(self.path, "explainer")
		self.assertEqual(ctx.exception.category, "precondition")

	def test_corrupt_parameters(self):
		checkpoint.save(random_builtin(4), self.path)
		self.edit(lambda doc: doc["parameters"][0].update(data="not base64!"))
		with self.assertRaises(CheckpointError):
			checkpoint.load(self.path)

	def test_truncated_parameters(self):
		checkpoint.save(random_builtin(4), self.path)
		self.edit(lambda doc: doc["parameters"][1].update(data="AAAAAAAAAAA="))
		with self.assertRaises(CheckpointError):
			checkpoint.load(self.path)

	def test_wrong_format(self):
		checkpoint.save(random_builtin(4), self.path)
		self.edit(lambda doc: doc.update(version=99))
		with self.assertRaises(CheckpointError):
			checkpoint.load(self.path)

	def test_not_json(self):
		with open(self.path, "w", encoding="utf-8") as f:
			f.write("{ nope")
		with self.assertRaises(ModelError) as ctx:
			checkpoint.load(self.path)
		self.assertEqual(ctx.exception.category, "parse")

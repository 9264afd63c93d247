# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

"""Small predictors and bridge children shared by the unit tests"""

import os
import shlex
import sys
from typing import Callable, Sequence

import numpy as np

from fex.commons.nnet import MlpNetwork
from fex.commons.predictor import BuiltinPredictor, Predictor

class FunctionPredictor(Predictor):
	"""Predictor computing each row's probabilities with a plain function"""

	kind = "test-function"

	def __init__(self, n_features: int, n_classes: int, fn: Callable[[np.ndarray], Sequence[float]]) -> None:
		super().__init__(n_features, n_classes)
		self.fn = fn

	def _predict_rows(self, rows: np.ndarray) -> np.ndarray:
		return np.array([self.fn(row) for row in rows], dtype=np.float64)

def constant_predictor(n_features: int, probs: Sequence[float]) -> FunctionPredictor:
	return FunctionPredictor(n_features, len(probs), lambda row: probs)

def first_feature_predictor(n_features: int) -> FunctionPredictor:
	"""Class 0 probability is the first feature (inputs in [0, 1])"""
	return FunctionPredictor(n_features, 2, lambda row: [row[0], 1.0 - row[0]])

def random_builtin(n_features: int, n_classes: int = 2, seed: int = 0, hidden: int = 8) -> BuiltinPredictor:
	return BuiltinPredictor(MlpNetwork([n_features, hidden, n_classes], "softmax", seed=seed))

BRIDGE_CHILD = '''
import json
import sys

n_features, n_classes, mode = int(sys.argv[1]), int(sys.argv[2]), sys.argv[3]
probs = [float(p) for p in sys.argv[4].split(",")] if len(sys.argv) > 4 else [1.0 / n_classes] * n_classes

if mode == "badhello":
	print(json.dumps({"hello": 1}), flush=True)
elif mode == "boolhello":
	print(json.dumps({"fex_bridge": True, "n_features": n_features, "n_classes": n_classes}), flush=True)
else:
	print(json.dumps({"fex_bridge": 1, "n_features": n_features, "n_classes": n_classes}), flush=True)

for line in sys.stdin:
	request = json.loads(line)
	if mode == "silent":
		continue
	if mode == "garbage":
		print("this is not json", flush=True)
		continue
	if mode == "badutf8":
		sys.stdout.buffer.write(b"\\xff\\xfe garbage\\n")
		sys.stdout.buffer.flush()
		continue
	if mode == "floatid":
		print(json.dumps({"id": float(request["id"]), "probs": probs}), flush=True)
		continue
	print(json.dumps({"id": request["id"], "probs": probs}), flush=True)
'''

def bridge_command(
	directory: str,
	n_features: int,
	n_classes: int,
	mode: str = "ok",
	probs: Sequence[float] = ()
) -> str:
	script = os.path.join(directory, "bridge_child.py")
	if not os.path.isfile(script):
		with open(script, "w", encoding="utf-8") as f:
			f.write(BRIDGE_CHILD)
	command = f"{shlex.quote(sys.executable)} {shlex.quote(script)} {n_features} {n_classes} {mode}"
	if probs:
		command += " " + ",".join(repr(float(p)) for p in probs)
	return command

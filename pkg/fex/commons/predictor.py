# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import json
import logging
import math
import queue
import shlex
import subprocess
import threading
from typing import List, Optional, Sequence

import numpy as np

from fex.commons.errors import DimensionError, FexError
from fex.commons.nnet import AdamState, MlpNetwork, adam_step
from fex.commons.settings import Settings
from fex.commons.synthdata import LabeledDataset
from fex.models.core import Mask, ProbVector, Sample

logger = logging.getLogger(__name__)

class PredictorError(FexError):
	category = "precondition"

class BridgeError(FexError):
	category = "bridge"

class ProtocolError(BridgeError):
	category = "protocol"

class Predictor:
	"""
	The prediction function f under explanation. Subclasses implement
	_predict_rows(); every row served counts as one predictor query.
	"""

	kind = "abstract"
	thread_safe = True

	def __init__(self, n_features: int, n_classes: int) -> None:
		self.n_features = n_features
		self.n_classes = n_classes
		self.queries = 0
		self._count_lock = threading.Lock()

	def _predict_rows(self, rows: np.ndarray) -> np.ndarray:
		raise NotImplementedError("Implement _predict_rows for each predictor kind")

	def predict_batch(self, rows: np.ndarray) -> np.ndarray:
		rows = np.asarray(rows, dtype=np.float64)
		if rows.ndim != 2 or rows.shape[1] != self.n_features:
			raise DimensionError(
				f"Predictor expects {self.n_features} features, got input of shape {rows.shape}"
			)
		with self._count_lock:
			self.queries += rows.shape[0]
		if not rows.shape[0]:
			return np.zeros((0, self.n_classes))
		return self._predict_rows(rows)

	def predict_proba(self, x: Sample) -> ProbVector:
		return ProbVector(self.predict_batch(x.features[None, :])[0])

	def check_class(self, class_index: int) -> None:
		if not 0 <= class_index < self.n_classes:
			raise PredictorError(
				f"Class index {class_index} out of range [0, {self.n_classes})", "dimension"
			)

	def close(self) -> None:
		pass

	def __enter__(self) -> "Predictor":
		return self

	def __exit__(self, *exc) -> None:
		self.close()


class BuiltinPredictor(Predictor):

	kind = "builtin-mlp"

	def __init__(self, network: MlpNetwork) -> None:
		if network.output_activation != "softmax":
			raise PredictorError("Builtin predictors need a softmax output layer")
		super().__init__(network.n_inputs, network.n_outputs)
		self.network = network
		self.training_losses: List[float] = []

	def _predict_rows(self, rows: np.ndarray) -> np.ndarray:
		return self.network.forward(rows)


def _is_int(value) -> bool:
	return type(value) is int


class BridgePredictor(Predictor):
	"""
	External black box speaking newline-delimited JSON on stdin/stdout.
	The child announces itself with
	  {"fex_bridge":1,"n_features":N,"n_classes":K}
	and then answers each {"id":i,"input":[...]} with {"id":i,"probs":[...]}.
	One request is in flight at a time; a handle must not be shared.
	"""

	kind = "blackbox-bridge"
	thread_safe = False
	SUM_TOLERANCE = 1e-6

	def __init__(self, command: str, timeout: Optional[float] = None) -> None:
		self.command = command
		self.timeout = Settings.BRIDGE_TIMEOUT if timeout is None else timeout
		self.line_number = 0
		self.next_id = 0
		self.process = None
		self._lines: "queue.Queue[Optional[bytes]]" = queue.Queue()
		try:
			self.process = subprocess.Popen(
				shlex.split(command),
				stdin=subprocess.PIPE,
				stdout=subprocess.PIPE
			)
		except (OSError, ValueError) as ex:
			raise BridgeError(f"Cannot spawn bridge '{command}': {ex}")
		self._reader = threading.Thread(target=self._pump, daemon=True)
		self._reader.start()

		try:
			n_features, n_classes = self._handshake()
		except BridgeError:
			self.close()
			raise
		super().__init__(n_features, n_classes)
		logger.info(f"Bridge '{command}' ready: {n_features} features, {n_classes} classes")

	def _pump(self) -> None:
		stdout = self.process.stdout
		try:
			for line in stdout:
				self._lines.put(line)
		except (OSError, ValueError) as ex:
			logger.debug(f"Bridge '{self.command}' output reader stopped: {ex}")
		finally:
			self._lines.put(None)

	def _read_line(self) -> str:
		try:
			line = self._lines.get(timeout=self.timeout)
		except queue.Empty:
			raise BridgeError(
				f"timeout after {self.timeout}s waiting for line {self.line_number + 1}"
			)
		if line is None:
			raise BridgeError(f"bridge closed its output after line {self.line_number}")
		self.line_number += 1
		try:
			return line.decode("utf-8").rstrip("\r\n")
		except UnicodeDecodeError:
			raise ProtocolError(f"line {self.line_number}: invalid UTF-8: {line[:80]!r}")

	def _parse(self, line: str, keys: Sequence[str]) -> dict:
		try:
			obj = json.loads(line)
		except ValueError:
			raise ProtocolError(f"line {self.line_number}: not JSON: {line[:80]!r}")
		if not isinstance(obj, dict) or sorted(obj) != sorted(keys):
			raise ProtocolError(
				f"line {self.line_number}: expected an object with keys {sorted(keys)}: {line[:80]!r}"
			)
		return obj

	def _handshake(self):
		obj = self._parse(self._read_line(), ["fex_bridge", "n_features", "n_classes"])
		n_features, n_classes = obj["n_features"], obj["n_classes"]
		if (
			not _is_int(obj["fex_bridge"]) or obj["fex_bridge"] != 1
			or not _is_int(n_features) or n_features < 1
			or not _is_int(n_classes) or n_classes < 1
		):
			raise ProtocolError(f"line {self.line_number}: handshake mismatch: {obj}")
		return n_features, n_classes

	def _request(self, row: np.ndarray) -> np.ndarray:
		request_id = self.next_id
		self.next_id += 1
		payload = json.dumps({"id": request_id, "input": [float(v) for v in row]})
		try:
			self.process.stdin.write((payload + "\n").encode("utf-8"))
			self.process.stdin.flush()
		except (OSError, ValueError) as ex:
			raise BridgeError(f"cannot write request {request_id}: {ex}")

		obj = self._parse(self._read_line(), ["id", "probs"])
		probs = obj["probs"]
		if not _is_int(obj["id"]) or obj["id"] != request_id:
			raise ProtocolError(
				f"line {self.line_number}: response id {obj['id']} does not match request {request_id}"
			)
		if (
			not isinstance(probs, list)
			or len(probs) != self.n_classes
			or any(isinstance(p, bool) or not isinstance(p, (int, float)) for p in probs)
			or any(not math.isfinite(p) or p < 0 for p in probs)
		):
			raise ProtocolError(f"line {self.line_number}: malformed probabilities {probs}")
		total = math.fsum(probs)
		if abs(total - 1.0) > BridgePredictor.SUM_TOLERANCE:
			raise ProtocolError(f"line {self.line_number}: probabilities sum to {total}")
		return np.array(probs, dtype=np.float64) / total

	def _predict_rows(self, rows: np.ndarray) -> np.ndarray:
		return np.array([self._request(row) for row in rows])

	def close(self) -> None:
		if self.process is None:
			return
		process, self.process = self.process, None
		try:
			process.stdin.close()
		except OSError:
			pass
		try:
			process.wait(timeout=self.timeout)
		except subprocess.TimeoutExpired:
			logger.warning(f"Bridge '{self.command}' did not exit, killing it")
			process.kill()
			process.wait()
		self._reader.join(timeout=self.timeout)
		process.stdout.close()


def naive_scores(
	p: Predictor,
	masks: np.ndarray,
	features: np.ndarray,
	class_index: int
) -> np.ndarray:
	"""
	c(m, x) = f_k(m*x) / K_m for every mask row; empty masks score 0 and
	cost no predictor query.
	"""
	p.check_class(class_index)
	masks = np.asarray(masks)
	counts = masks.sum(axis=1)
	scores = np.zeros(masks.shape[0])
	nonzero = counts > 0
	if np.any(nonzero):
		inputs = np.where(masks[nonzero] == 1, features, 0.0)
		scores[nonzero] = p.predict_batch(inputs)[:, class_index] / counts[nonzero]
	return scores

def naive_score(p: Predictor, mask: Mask, x: Sample, class_index: int) -> float:
	if len(mask) != x.n_features:
		raise DimensionError(f"Mask length {len(mask)} does not match {x.n_features} features")
	return float(naive_scores(p, mask.bits[None, :], x.features, class_index)[0])

def train_builtin(
	data: LabeledDataset,
	epochs: int = 50,
	lr: float = 1e-2,
	seed: int = 0,
	hidden_sizes: Sequence[int] = (16,),
	batch_size: int = 32
) -> BuiltinPredictor:
	"""Softmax cross-entropy training of an MLP classifier on unmasked data"""
	if not data.n_samples:
		raise PredictorError("Cannot train a predictor on an empty dataset")
	network = MlpNetwork(
		[data.n_features, *hidden_sizes, data.n_classes], "softmax", seed=seed
	)
	state = AdamState(network)
	rng = np.random.default_rng(seed)
	onehot = np.eye(data.n_classes)[data.labels]
	losses = []
	for epoch in range(epochs):
		order = rng.permutation(data.n_samples)
		total = 0.0
		for start in range(0, data.n_samples, batch_size):
			idx = order[start:start + batch_size]
			probs = network.forward(data.features[idx])
			total -= float(np.log(np.maximum(probs[np.arange(len(idx)), data.labels[idx]], 1e-300)).sum())
			grads = network.backward(
				data.features[idx],
				(probs - onehot[idx]) / len(idx),
				through_output=False
			)
			adam_step(network, grads, state, lr)
		losses.append(total / data.n_samples)
		logger.debug(f"Predictor epoch {epoch + 1}/{epochs}: cross-entropy {losses[-1]:.5f}")

	predictor = BuiltinPredictor(network)
	predictor.training_losses = losses
	if losses:
		logger.info(f"Predictor trained for {epochs} epochs, final cross-entropy {losses[-1]:.5f}")
	return predictor

def open_blackbox_bridge(command: str, timeout: Optional[float] = None) -> BridgePredictor:
	return BridgePredictor(command, timeout)

def accuracy(p: Predictor, data: LabeledDataset) -> float:
	if not data.n_samples:
		raise PredictorError("Accuracy of an empty dataset is undefined")
	return float(np.mean(np.argmax(p.predict_batch(data.features), axis=1) == data.labels))

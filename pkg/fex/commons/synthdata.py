# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import csv
import logging
import os
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set

import numpy as np

from fex.commons.errors import FexError, ParseError
from fex.commons.settings import Settings
from fex.models.common import Tool
from fex.models.core import Sample
from fex.models.dataset import DatasetMeta

logger = logging.getLogger(__name__)

class DatasetError(FexError):
	category = "precondition"

class LabeledDataset:
	"""
	Feature matrix with integer labels. `ground_truth` maps a class index to
	the feature indices that carry the evidence for that class.
	"""

	def __init__(
		self,
		features: Any,
		labels: Any,
		n_classes: int,
		ground_truth: Optional[Dict[int, Iterable[int]]] = None,
		generator: Optional[Dict[str, Any]] = None
	) -> None:
		self.features = np.array(features, dtype=np.float64)
		self.labels = np.array(labels, dtype=np.int64)
		if self.features.ndim != 2 or self.labels.shape != (self.features.shape[0],):
			raise DatasetError(
				f"Features {self.features.shape} and labels {self.labels.shape} do not line up",
				"dimension"
			)
		self.n_classes = int(n_classes)
		if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
			raise DatasetError(f"Labels must lie in [0, {self.n_classes})")
		self.ground_truth = {
			int(k): sorted(int(i) for i in v) for k, v in (ground_truth or {}).items()
		}
		for k, indices in self.ground_truth.items():
			if any(i < 0 or i >= self.n_features for i in indices):
				raise DatasetError(f"Ground truth of class {k} out of feature range: {indices}")
		self.generator = dict(generator or {})

	@property
	def n_samples(self) -> int:
		return self.features.shape[0]

	@property
	def n_features(self) -> int:
		return self.features.shape[1]

	def __len__(self) -> int:
		return self.n_samples

	def sample(self, i: int) -> Sample:
		return Sample(self.features[i], int(self.labels[i]))

	def samples(self) -> List[Sample]:
		return [self.sample(i) for i in range(self.n_samples)]

	def subset(self, indices: Sequence[int]) -> "LabeledDataset":
		idx = np.asarray(indices, dtype=np.int64)
		return LabeledDataset(
			self.features[idx],
			self.labels[idx],
			self.n_classes,
			self.ground_truth,
			self.generator
		)

	def ground_truth_for(self, class_index: int) -> Set[int]:
		return set(self.ground_truth.get(class_index, []))

	def meta(self) -> DatasetMeta:
		return DatasetMeta(
			self.n_features,
			self.n_classes,
			{str(k): v for k, v in self.ground_truth.items()},
			self.generator,
			Tool(Settings.PROGNAME, Settings.VERSION)
		)

	def __eq__(self, o: Any) -> bool:
		return (
			isinstance(o, LabeledDataset)
			and self.n_classes == o.n_classes
			and self.ground_truth == o.ground_truth
			and self.generator == o.generator
			and np.array_equal(self.labels, o.labels)
			and np.array_equal(self.features, o.features)
		)


def gen_planted(
	n_samples: int,
	n_features: int,
	k_informative: int,
	threshold: float = 0.5,
	seed: int = 0
) -> LabeledDataset:
	"""
	Uniform[0,1] features; label 1 when the mean of a planted feature subset
	exceeds `threshold`. Only class 1 has ground truth: with zero-masking,
	removing planted features can only push a sample towards class 0.
	"""
	if not 1 <= k_informative <= n_features:
		raise DatasetError(f"k_informative must lie in [1, {n_features}], got {k_informative}")
	rng = np.random.default_rng(seed)
	planted = sorted(rng.choice(n_features, size=k_informative, replace=False).tolist())
	features = rng.uniform(0.0, 1.0, size=(n_samples, n_features))
	labels = (features[:, planted].mean(axis=1) > threshold).astype(np.int64)
	logger.debug(f"Planted task over {n_features} features, informative {planted}")
	return LabeledDataset(
		features,
		labels,
		2,
		{1: planted},
		{
			"task": f"planted-{k_informative}",
			"seed": seed,
			"threshold": threshold,
			"n_samples": n_samples,
			"planted": planted
		}
	)

def gen_two_class_disjoint(
	n_samples: int,
	n_features: int,
	seed: int = 0,
	k_informative: int = 2,
	swap: bool = False
) -> LabeledDataset:
	"""
	Two disjoint feature sets S0 and S1: the label is 0 when S0 has the
	larger mean, 1 otherwise. `swap` exchanges the roles of the two sets.
	"""
	if n_features < 4 or 2 * k_informative > n_features or k_informative < 1:
		raise DatasetError(
			f"Need n_features >= 4 and 2*k_informative <= n_features, got {n_features}/{k_informative}"
		)
	rng = np.random.default_rng(seed)
	chosen = rng.permutation(n_features)[:2 * k_informative]
	sets = [sorted(chosen[:k_informative].tolist()), sorted(chosen[k_informative:].tolist())]
	if swap:
		sets.reverse()
	features = rng.uniform(0.0, 1.0, size=(n_samples, n_features))
	labels = np.where(
		features[:, sets[0]].mean(axis=1) > features[:, sets[1]].mean(axis=1), 0, 1
	).astype(np.int64)
	return LabeledDataset(
		features,
		labels,
		2,
		{0: sets[0], 1: sets[1]},
		{
			"task": "two-class-disjoint",
			"seed": seed,
			"n_samples": n_samples,
			"k_informative": k_informative,
			"swap": swap
		}
	)


def meta_path(path: str) -> str:
	return f"{path}.meta.json"

def save_csv(dataset: LabeledDataset, path: str) -> None:
	with open(path, "w", newline="", encoding="utf-8") as f:
		writer = csv.writer(f, lineterminator="\n")
		writer.writerow([f"f{i}" for i in range(dataset.n_features)] + ["label"])
		for row, label in zip(dataset.features, dataset.labels):
			writer.writerow([repr(float(v)) for v in row] + [int(label)])
	dataset.meta().to_file(meta_path(path))
	logger.debug(f"Dataset with {dataset.n_samples} samples written to {path}")

def load_csv(path: str) -> LabeledDataset:
	with open(path, newline="", encoding="utf-8") as f:
		reader = csv.reader(f)
		try:
			header = next(reader)
		except StopIteration:
			raise ParseError("missing header", 1)
		n = len(header) - 1
		if n < 1 or header != [f"f{i}" for i in range(n)] + ["label"]:
			raise ParseError(f"header must read f0,...,f{{N-1}},label: {','.join(header)}", 1)

		features = []
		labels = []
		for row in reader:
			line = reader.line_num
			if not row or all(not cell.strip() for cell in row):
				raise ParseError("empty row", line)
			if len(row) != n + 1:
				raise ParseError(f"expected {n + 1} columns, found {len(row)}", line)
			try:
				features.append([float(v) for v in row[:-1]])
				labels.append(int(row[-1]))
			except ValueError as ex:
				raise ParseError(str(ex), line)

	meta = DatasetMeta()
	if os.path.isfile(meta_path(path)):
		meta = DatasetMeta.from_file(meta_path(path))
		if meta.n_features != n:
			raise ParseError(
				f"header declares {n} features, metadata {meta_path(path)} declares {meta.n_features}", 1
			)
	elif labels:
		meta.n_classes = max(2, max(labels) + 1)

	try:
		return LabeledDataset(
			np.array(features, dtype=np.float64).reshape(len(features), n),
			labels,
			meta.n_classes,
			{int(k): v for k, v in meta.ground_truth.items()},
			meta.generator
		)
	except DatasetError as ex:
		raise ParseError(str(ex))

def generate(
	task: str,
	n_samples: int,
	n_features: int,
	seed: int = 0,
	threshold: float = 0.5,
	k_informative: Optional[int] = None
) -> LabeledDataset:
	"""Dispatch on task names `planted-<k>` and `two-class-disjoint`"""
	if task.startswith("planted-"):
		try:
			k = int(task[len("planted-"):])
		except ValueError:
			raise DatasetError(f"Malformed planted task name '{task}'")
		return gen_planted(n_samples, n_features, k, threshold, seed)
	if task == "two-class-disjoint":
		return gen_two_class_disjoint(n_samples, n_features, seed, k_informative or 2)
	raise DatasetError(f"Unknown task '{task}', use planted-<k> or two-class-disjoint")

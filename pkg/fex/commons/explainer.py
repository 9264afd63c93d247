# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

from typing import Sequence, Tuple

import numpy as np

from fex.commons.errors import DimensionError
from fex.commons.nnet import MlpNetwork
from fex.commons.policy import EPS_CLAMP, BernoulliPolicy, clamp_probs
from fex.models.core import Attribution, Sample

class ExplainerModel:
	"""
	g(x): one sigmoid head of width N per class, stored as a single output
	layer of K*N units. Explaining a sample is one forward pass of g and
	never queries the predictor.
	"""

	def __init__(self, network: MlpNetwork, n_features: int, n_classes: int) -> None:
		if (
			network.output_activation != "sigmoid"
			or network.n_inputs != n_features
			or network.n_outputs != n_features * n_classes
		):
			raise DimensionError(
				f"Explainer network {network.layer_sizes} ({network.output_activation})"
				f" does not provide {n_classes} sigmoid heads over {n_features} features"
			)
		self.network = network
		self.n_features = n_features
		self.n_classes = n_classes
		self.forward_count = 0

	@classmethod
	def create(
		cls,
		n_features: int,
		n_classes: int,
		hidden_sizes: Sequence[int] = (32,),
		seed: int = 0
	) -> "ExplainerModel":
		network = MlpNetwork(
			[n_features, *hidden_sizes, n_features * n_classes], "sigmoid", seed=seed
		)
		return cls(network, n_features, n_classes)

	def lambdas(self, rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
		"""
		Clamped head outputs of shape (B, K, N), and where the clamp lets
		gradients through.
		"""
		rows = np.asarray(rows, dtype=np.float64)
		raw = self.network.forward(rows).reshape(rows.shape[0], self.n_classes, self.n_features)
		self.forward_count += 1
		passthrough = (raw >= EPS_CLAMP) & (raw <= 1.0 - EPS_CLAMP)
		return clamp_probs(raw), passthrough

	def explain_all(self, x: Sample) -> np.ndarray:
		if x.n_features != self.n_features:
			raise DimensionError(
				f"Sample has {x.n_features} features, explainer expects {self.n_features}"
			)
		lam, _ = self.lambdas(x.features[None, :])
		return lam[0]

	def explain(self, x: Sample, class_index: int) -> Attribution:
		if not 0 <= class_index < self.n_classes:
			raise DimensionError(f"Class index {class_index} out of range [0, {self.n_classes})")
		return Attribution(self.explain_all(x)[class_index], normalized=True)

	def policy(self, x: Sample, class_index: int) -> BernoulliPolicy:
		return BernoulliPolicy(self.explain(x, class_index).values)


class ValueModel:
	"""v(x): one unconstrained output per class, the expected score under the current policy"""

	def __init__(self, network: MlpNetwork, n_features: int, n_classes: int) -> None:
		if (
			network.output_activation != "identity"
			or network.n_inputs != n_features
			or network.n_outputs != n_classes
		):
			raise DimensionError(
				f"Value network {network.layer_sizes} does not map {n_features} features to {n_classes} values"
			)
		self.network = network
		self.n_features = n_features
		self.n_classes = n_classes

	@classmethod
	def create(
		cls,
		n_features: int,
		n_classes: int,
		hidden_sizes: Sequence[int] = (32,),
		seed: int = 0
	) -> "ValueModel":
		network = MlpNetwork([n_features, *hidden_sizes, n_classes], "identity", seed=seed)
		return cls(network, n_features, n_classes)

	def values(self, rows: np.ndarray) -> np.ndarray:
		return self.network.forward(np.asarray(rows, dtype=np.float64))

	def value(self, x: Sample, class_index: int) -> float:
		return float(self.values(x.features[None, :])[0, class_index])

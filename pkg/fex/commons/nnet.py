# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

"""
Small multilayer perceptrons with tanh hidden layers, reverse-mode
gradients and an Adam optimizer. Everything is float64 so that finite
difference checks stay meaningful.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from fex.commons.errors import FexError

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]
LossProbe = Callable[[np.ndarray], Tuple[float, np.ndarray]]

class NetworkError(FexError):
	category = "dimension"

class GradientBundle:
	"""Per-parameter gradients, shaped like the owning network's weights and biases"""

	def __init__(self, weights: List[np.ndarray], biases: List[np.ndarray]) -> None:
		self.weights = weights
		self.biases = biases

	@classmethod
	def zeros_like(cls, net: "MlpNetwork") -> "GradientBundle":
		return cls(
			[np.zeros_like(w) for w in net.weights],
			[np.zeros_like(b) for b in net.biases]
		)

	def arrays(self) -> List[np.ndarray]:
		"""Interleaved as W0, b0, W1, b1, ..."""
		result = []
		for w, b in zip(self.weights, self.biases):
			result += [w, b]
		return result

	def flat(self) -> np.ndarray:
		return np.concatenate([a.ravel() for a in self.arrays()])

	def __add__(self, o: "GradientBundle") -> "GradientBundle":
		return GradientBundle(
			[a + b for a, b in zip(self.weights, o.weights)],
			[a + b for a, b in zip(self.biases, o.biases)]
		)

	def __mul__(self, factor: float) -> "GradientBundle":
		return GradientBundle(
			[a * factor for a in self.weights],
			[a * factor for a in self.biases]
		)

	__rmul__ = __mul__


class MlpNetwork:

	HIDDEN_ACTIVATION = "tanh"
	OUTPUT_ACTIVATIONS = ("sigmoid", "softmax", "identity")

	def __init__(
		self,
		layer_sizes: Sequence[int],
		output_activation: str = "identity",
		seed: Optional[int] = None,
		weights: Optional[List[ArrayLike]] = None,
		biases: Optional[List[ArrayLike]] = None
	) -> None:
		self.layer_sizes = [int(s) for s in layer_sizes]
		if len(self.layer_sizes) < 2:
			raise NetworkError("A network needs at least an input and an output layer", "precondition")
		if any(s < 1 for s in self.layer_sizes):
			raise NetworkError(f"Every layer needs at least one unit: {self.layer_sizes}", "precondition")
		if output_activation not in MlpNetwork.OUTPUT_ACTIVATIONS:
			raise NetworkError(f"Unknown output activation '{output_activation}'", "precondition")
		self.output_activation = output_activation
		self.hidden_activation = MlpNetwork.HIDDEN_ACTIVATION

		shapes = list(zip(self.layer_sizes[1:], self.layer_sizes[:-1]))
		if weights is None:
			rng = np.random.default_rng(seed)
			self.weights = [
				rng.uniform(-1.0, 1.0, size=(fan_out, fan_in)) * np.sqrt(6.0 / (fan_in + fan_out))
				for fan_out, fan_in in shapes
			]
		else:
			self.weights = [np.array(w, dtype=np.float64) for w in weights]
		if biases is None:
			self.biases = [np.zeros(fan_out) for fan_out, _ in shapes]
		else:
			self.biases = [np.array(b, dtype=np.float64) for b in biases]

		if (
			len(self.weights) != len(shapes)
			or len(self.biases) != len(shapes)
			or any(w.shape != s for w, s in zip(self.weights, shapes))
			or any(b.shape != (s[0],) for b, s in zip(self.biases, shapes))
		):
			raise NetworkError(f"Parameter shapes do not chain for layers {self.layer_sizes}")

	@classmethod
	def zeros(cls, layer_sizes: Sequence[int], output_activation: str = "identity") -> "MlpNetwork":
		sizes = list(layer_sizes)
		return cls(
			sizes,
			output_activation,
			weights=[np.zeros((o, i)) for o, i in zip(sizes[1:], sizes[:-1])],
			biases=[np.zeros(o) for o in sizes[1:]]
		)

	@property
	def n_inputs(self) -> int:
		return self.layer_sizes[0]

	@property
	def n_outputs(self) -> int:
		return self.layer_sizes[-1]

	def parameters(self) -> List[np.ndarray]:
		"""Interleaved as W0, b0, W1, b1, ... (live arrays, not copies)"""
		result = []
		for w, b in zip(self.weights, self.biases):
			result += [w, b]
		return result

	def n_parameters(self) -> int:
		return sum(p.size for p in self.parameters())

	def copy(self) -> "MlpNetwork":
		return MlpNetwork(
			self.layer_sizes,
			self.output_activation,
			weights=[w.copy() for w in self.weights],
			biases=[b.copy() for b in self.biases]
		)

	def _as_rows(self, x: ArrayLike) -> Tuple[np.ndarray, bool]:
		arr = np.asarray(x, dtype=np.float64)
		single = arr.ndim == 1
		rows = arr[None, :] if single else arr
		if rows.ndim != 2 or rows.shape[1] != self.n_inputs:
			raise NetworkError(
				f"Input of shape {arr.shape} does not fit {self.n_inputs} input units"
			)
		return rows, single

	def _output(self, z: np.ndarray) -> np.ndarray:
		if self.output_activation == "sigmoid":
			return expit(z)
		if self.output_activation == "softmax":
			e = np.exp(z - z.max(axis=1, keepdims=True))
			return e / e.sum(axis=1, keepdims=True)
		return z

	def _forward_cache(self, rows: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
		acts = [rows]
		a = rows
		for w, b in zip(self.weights[:-1], self.biases[:-1]):
			a = np.tanh(a @ w.T + b)
			acts.append(a)
		return acts, self._output(a @ self.weights[-1].T + self.biases[-1])

	def forward(self, x: ArrayLike) -> np.ndarray:
		rows, single = self._as_rows(x)
		_, out = self._forward_cache(rows)
		return out[0] if single else out

	def backward(
		self,
		x: ArrayLike,
		upstream: ArrayLike,
		through_output: bool = True
	) -> GradientBundle:
		"""
		Gradient of sum(upstream * output) with respect to all parameters,
		summed over input rows. With `through_output=False`, `upstream` is
		taken as the gradient with respect to the output pre-activation.
		"""
		rows, _ = self._as_rows(x)
		up = np.asarray(upstream, dtype=np.float64).reshape(rows.shape[0], -1)
		if up.shape[1] != self.n_outputs:
			raise NetworkError(
				f"Upstream gradient of width {up.shape[1]} does not fit {self.n_outputs} outputs"
			)
		acts, out = self._forward_cache(rows)

		if not through_output or self.output_activation == "identity":
			delta = up
		elif self.output_activation == "sigmoid":
			delta = up * out * (1.0 - out)
		else:
			delta = out * (up - (up * out).sum(axis=1, keepdims=True))

		grad_w = [np.empty(0)] * len(self.weights)
		grad_b = [np.empty(0)] * len(self.biases)
		for i in reversed(range(len(self.weights))):
			grad_w[i] = delta.T @ acts[i]
			grad_b[i] = delta.sum(axis=0)
			if i > 0:
				delta = (delta @ self.weights[i]) * (1.0 - acts[i] ** 2)
		return GradientBundle(grad_w, grad_b)


class AdamState:

	BETA1 = 0.9
	BETA2 = 0.999
	EPS = 1e-8

	def __init__(self, net: MlpNetwork) -> None:
		self.step = 0
		self.first = [np.zeros_like(p) for p in net.parameters()]
		self.second = [np.zeros_like(p) for p in net.parameters()]


def adam_step(
	net: MlpNetwork,
	grads: GradientBundle,
	state: AdamState,
	lr: float
) -> Tuple[MlpNetwork, AdamState]:
	"""One Adam update, applied to the network's parameter arrays in place"""
	params = net.parameters()
	arrays = grads.arrays()
	if len(arrays) != len(params) or any(g.shape != p.shape for g, p in zip(arrays, params)):
		raise NetworkError("Gradient shapes do not mirror the network parameters")
	state.step += 1
	b1, b2 = AdamState.BETA1, AdamState.BETA2
	for p, g, m, v in zip(params, arrays, state.first, state.second):
		m *= b1
		m += (1.0 - b1) * g
		v *= b2
		v += (1.0 - b2) * g * g
		m_hat = m / (1.0 - b1 ** state.step)
		v_hat = v / (1.0 - b2 ** state.step)
		p -= lr * m_hat / (np.sqrt(v_hat) + AdamState.EPS)
	return net, state


def finite_diff_check(
	net: MlpNetwork,
	x: ArrayLike,
	probe: LossProbe,
	step: float = 1e-5,
	floor: float = 1e-12
) -> float:
	"""
	Compare backward() against central finite differences of a scalar probe
	of the network output. The probe returns its value and its gradient
	with respect to the output. Returns the largest relative error
	|analytic - numeric| / max(floor, |numeric|) over all parameters.
	"""
	_, upstream = probe(net.forward(x))
	analytic = net.backward(x, upstream).arrays()
	worst = 0.0
	for param, grad in zip(net.parameters(), analytic):
		for idx in np.ndindex(param.shape):
			orig = param[idx]
			param[idx] = orig + step
			plus, _ = probe(net.forward(x))
			param[idx] = orig - step
			minus, _ = probe(net.forward(x))
			param[idx] = orig
			numeric = (plus - minus) / (2.0 * step)
			error = abs(grad[idx] - numeric) / max(floor, abs(numeric))
			worst = max(worst, error)
	logger.debug(f"Finite difference check over {net.n_parameters()} parameters: {worst:.3e}")
	return worst

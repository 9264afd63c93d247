# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

"""
Network persistence. A checkpoint is a JSON document with a plain
architecture descriptor and base64 blocks of little-endian float64
parameters, so a load reproduces forward outputs bit for bit.
"""

import base64
import binascii
import logging
from typing import Any, Dict, Optional, Union

import numpy as np

from fex.commons.errors import FexError
from fex.commons.explainer import ExplainerModel, ValueModel
from fex.commons.nnet import MlpNetwork
from fex.commons.predictor import BuiltinPredictor
from fex.commons.settings import Settings
from fex.models.checkpoint import Architecture, Checkpoint, ParameterBlock
from fex.models.common import Tool

logger = logging.getLogger(__name__)

FORMAT = "fex-ckpt"
VERSION = 1
KINDS = ("predictor", "explainer", "value")

Model = Union[BuiltinPredictor, ExplainerModel, ValueModel]

class CheckpointError(FexError):
	category = "checkpoint"

def _encode_array(name: str, arr: np.ndarray) -> ParameterBlock:
	data = np.ascontiguousarray(arr, dtype="<f8").tobytes()
	return ParameterBlock(name, list(arr.shape), base64.b64encode(data).decode("ascii"))

def _decode_array(block: ParameterBlock) -> np.ndarray:
	try:
		raw = base64.b64decode(block.data.encode("ascii"), validate=True)
	except (binascii.Error, ValueError) as ex:
		raise CheckpointError(f"Parameter block {block.name} is not valid base64: {ex}")
	count = int(np.prod(block.shape)) if block.shape else 1
	if len(raw) != 8 * count:
		raise CheckpointError(
			f"Parameter block {block.name} holds {len(raw)} bytes, shape {block.shape} needs {8 * count}"
		)
	return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(block.shape)

def _network_of(model: Model) -> MlpNetwork:
	return model.network

def _kind_of(model: Model) -> str:
	if isinstance(model, BuiltinPredictor):
		return "predictor"
	if isinstance(model, ExplainerModel):
		return "explainer"
	if isinstance(model, ValueModel):
		return "value"
	raise CheckpointError(f"Cannot checkpoint {type(model).__name__}", "precondition")

def to_checkpoint(
	model: Model,
	config: Optional[Dict[str, Any]] = None,
	seed: Optional[int] = None
) -> Checkpoint:
	net = _network_of(model)
	blocks = []
	for i, (w, b) in enumerate(zip(net.weights, net.biases)):
		blocks += [_encode_array(f"W{i}", w), _encode_array(f"b{i}", b)]
	return Checkpoint(
		FORMAT,
		VERSION,
		_kind_of(model),
		Architecture(
			net.layer_sizes,
			net.hidden_activation,
			net.output_activation,
			model.n_features,
			model.n_classes
		),
		blocks,
		config,
		seed,
		Tool(Settings.PROGNAME, Settings.VERSION)
	)

def from_checkpoint(ckpt: Checkpoint, kind: Optional[str] = None) -> Model:
	if ckpt.format != FORMAT or ckpt.version != VERSION:
		raise CheckpointError(f"Unsupported checkpoint format {ckpt.format!r} version {ckpt.version}")
	if ckpt.kind not in KINDS:
		raise CheckpointError(f"Unknown checkpoint kind {ckpt.kind!r}")
	if kind and ckpt.kind != kind:
		raise CheckpointError(f"Expected a {kind} checkpoint, found {ckpt.kind}", "precondition")
	arch = ckpt.architecture
	arrays = [_decode_array(block) for block in ckpt.parameters]
	try:
		net = MlpNetwork(
			arch.layer_sizes,
			arch.output_activation,
			weights=arrays[0::2],
			biases=arrays[1::2]
		)
		if ckpt.kind == "predictor":
			return BuiltinPredictor(net)
		if ckpt.kind == "explainer":
			return ExplainerModel(net, arch.n_features, arch.n_classes)
		return ValueModel(net, arch.n_features, arch.n_classes)
	except FexError as ex:
		raise CheckpointError(f"Checkpoint does not describe a valid {ckpt.kind}: {ex}")

def save(
	model: Model,
	path: str,
	config: Optional[Dict[str, Any]] = None,
	seed: Optional[int] = None
) -> Checkpoint:
	ckpt = to_checkpoint(model, config, seed)
	ckpt.to_file(path)
	logger.debug(f"{ckpt.kind} checkpoint written to {path}")
	return ckpt

def load(path: str, kind: Optional[str] = None) -> Model:
	return from_checkpoint(Checkpoint.from_file(path), kind)

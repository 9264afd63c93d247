# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

from .base import BaseModel
from .common import Tool
from typing import Any, Dict, List, Optional

class Architecture(BaseModel):
	def __init__(
		self,
		layer_sizes: Optional[List[int]] = None,
		hidden_activation: str = "tanh",
		output_activation: str = "identity",
		n_features: int = 0,
		n_classes: int = 0
	) -> None:
		self.layer_sizes = list(layer_sizes or [])
		self.hidden_activation = hidden_activation
		self.output_activation = output_activation
		self.n_features = n_features
		self.n_classes = n_classes


class ParameterBlock(BaseModel):
	"""One weight matrix or bias vector as base64 of little-endian float64"""
	def __init__(
		self,
		name: str = "",
		shape: Optional[List[int]] = None,
		data: str = ""
	) -> None:
		self.name = name
		self.shape = list(shape or [])
		self.data = data


class Checkpoint(BaseModel):
	def __init__(
		self,
		format: str = "",
		version: int = 0,
		kind: str = "",
		architecture: Optional[Architecture] = None,
		parameters: Optional[List[ParameterBlock]] = None,
		config: Optional[Dict[str, Any]] = None,
		seed: Optional[int] = None,
		tool: Optional[Tool] = None
	) -> None:
		self.format = format
		self.version = version
		self.kind = kind
		self.architecture = Architecture.decode(architecture)
		self.parameters = ParameterBlock.drilldown(parameters)
		self.config = config or {}
		self.seed = seed
		self.tool = Tool.decode(tool)

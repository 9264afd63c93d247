# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

from .base import BaseModel
from .common import Tool
from typing import Any, Dict, List, Optional

class DatasetMeta(BaseModel):
	"""Sidecar `<csv>.meta.json` of a labeled dataset"""
	def __init__(
		self,
		n_features: int = 0,
		n_classes: int = 2,
		ground_truth: Optional[Dict[str, List[int]]] = None,
		generator: Optional[Dict[str, Any]] = None,
		tool: Optional[Tool] = None
	) -> None:
		self.n_features = n_features
		self.n_classes = n_classes
		self.ground_truth = ground_truth or {}
		self.generator = generator or {}
		self.tool = Tool.decode(tool) if tool else None

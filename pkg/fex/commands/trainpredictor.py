# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import logging
from typing import Any, Dict, List, Optional

from fex.commands.command import Command
from fex.commons import checkpoint
from fex.commons.predictor import BuiltinPredictor, accuracy, train_builtin
from fex.commons.synthdata import load_csv

logger = logging.getLogger(__name__)

class TrainPredictor(Command):

	def __init__(self, config: Dict[str, Any], dryrun: bool) -> None:
		super().__init__(config, dryrun)

	@staticmethod
	def execute(
		data: str,
		output: str,
		epochs: int = 50,
		lr: float = 1e-2,
		hidden_sizes: Optional[List[int]] = None,
		batch_size: int = 32,
		seed: int = 0,
		config: Optional[Dict[str, Any]] = None,
		dryrun: bool = False
	) -> bool:
		cmd = TrainPredictor(config or {}, dryrun)
		return cmd.exec(data, output, epochs, lr, hidden_sizes or [16], batch_size, seed)

	def run(
		self,
		data_path: str,
		output: str,
		epochs: int,
		lr: float,
		hidden_sizes: List[int],
		batch_size: int,
		seed: int
	) -> BuiltinPredictor:
		data = load_csv(data_path)
		predictor = train_builtin(data, epochs, lr, seed, hidden_sizes, batch_size)
		logger.info(f"Training accuracy on {data_path}: {accuracy(predictor, data):.4f}")
		checkpoint.save(predictor, output, self.config, seed)
		return predictor

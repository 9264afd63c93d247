# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import json
import logging
from typing import Any, Dict, List, Optional

from fex.commands.command import Command, CommandError
from fex.commons.ablation import run_ablation
from fex.models.reports import Artifact
from fex.models.training import TrainingConfig

logger = logging.getLogger(__name__)

def parse_values(raw: List[str]) -> List[Any]:
	"""Each value is JSON (`5`, `0.0`, `[32,32]`) or else taken as a string; config file values are kept"""
	values = []
	for item in raw:
		if not isinstance(item, str):
			values.append(item)
			continue
		try:
			values.append(json.loads(item))
		except ValueError:
			values.append(item)
	return values

class Ablation(Command):

	def __init__(self, config: Dict[str, Any], dryrun: bool) -> None:
		super().__init__(config, dryrun)

	@staticmethod
	def execute(
		parameter: str,
		values: List[str],
		seeds: List[int],
		training: TrainingConfig,
		task: str = "planted-2",
		n_features: int = 10,
		train_size: int = 2000,
		test_size: int = 100,
		predictor_epochs: int = 50,
		output: str = "",
		config: Optional[Dict[str, Any]] = None,
		dryrun: bool = False
	) -> bool:
		cmd = Ablation(config or {}, dryrun)
		return cmd.exec(
			parameter, values, seeds, training, task, n_features, train_size,
			test_size, predictor_epochs, output
		)

	def run(
		self,
		parameter: str,
		values: List[str],
		seeds: List[int],
		training: TrainingConfig,
		task: str,
		n_features: int,
		train_size: int,
		test_size: int,
		predictor_epochs: int,
		output: str
	) -> Artifact:
		if not values:
			raise CommandError("Give at least one value with --values")
		report = run_ablation(
			parameter, parse_values(values), seeds, training, task,
			n_features, train_size, test_size, predictor_epochs
		)
		for value, means in report.means.items():
			logger.info(f"{parameter}={value}: {means}")
		artifact = self.artifact("ablation", report)
		self.write(artifact, output)
		return artifact

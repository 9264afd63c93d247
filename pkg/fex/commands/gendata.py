# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import logging
from typing import Any, Dict, Optional

from fex.commands.command import Command, CommandError
from fex.commons.synthdata import generate, meta_path, save_csv

logger = logging.getLogger(__name__)

class GenData(Command):

	def __init__(self, config: Dict[str, Any], dryrun: bool) -> None:
		super().__init__(config, dryrun)

	@staticmethod
	def execute(
		task: str,
		n_samples: int,
		n_features: int,
		output: str,
		seed: int = 0,
		threshold: float = 0.5,
		k_informative: Optional[int] = None,
		test_size: int = 0,
		test_output: str = "",
		config: Optional[Dict[str, Any]] = None,
		dryrun: bool = False
	) -> bool:
		cmd = GenData(config or {}, dryrun)
		return cmd.exec(
			task, n_samples, n_features, output, seed, threshold, k_informative, test_size, test_output
		)

	def run(
		self,
		task: str,
		n_samples: int,
		n_features: int,
		output: str,
		seed: int,
		threshold: float,
		k_informative: Optional[int],
		test_size: int,
		test_output: str
	) -> bool:
		if bool(test_size) != bool(test_output):
			raise CommandError("--test-size and --test-output go together")
		data = generate(task, n_samples + test_size, n_features, seed, threshold, k_informative)
		save_csv(data.subset(range(n_samples)), output)
		logger.info(f"[{task}] {n_samples} samples written to {output} and {meta_path(output)}")
		if test_size:
			save_csv(data.subset(range(n_samples, n_samples + test_size)), test_output)
			logger.info(f"[{task}] {test_size} held-out samples written to {test_output}")
		return True

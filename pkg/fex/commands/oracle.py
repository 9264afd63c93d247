# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import logging
from typing import Any, Dict, Optional

from fex.commands.command import Command
from fex.commons.oracle import empirical_attribution, monte_carlo_attribution
from fex.models.core import Sample
from fex.models.reports import Artifact

logger = logging.getLogger(__name__)

class Oracle(Command):

	def __init__(self, config: Dict[str, Any], dryrun: bool) -> None:
		super().__init__(config, dryrun)

	@staticmethod
	def execute(
		input: str,
		predictor: str = "",
		bridge: str = "",
		class_index: Optional[int] = None,
		mc_samples: int = 0,
		seed: int = 0,
		threads: Optional[int] = None,
		output: str = "",
		config: Optional[Dict[str, Any]] = None,
		dryrun: bool = False
	) -> bool:
		cmd = Oracle(config or {}, dryrun)
		return cmd.exec(input, predictor, bridge, class_index, mc_samples, seed, threads, output)

	def run(
		self,
		input_path: str,
		predictor_path: str,
		bridge: str,
		class_index: Optional[int],
		mc_samples: int,
		seed: int,
		threads: Optional[int],
		output: str
	) -> Artifact:
		x = Sample.from_file(input_path)
		p = self.open_predictor(predictor_path, bridge)
		self.check_width(input_path, x.n_features, p.n_features)
		k = p.predict_proba(x).argmax() if class_index is None else class_index

		if mc_samples:
			result = monte_carlo_attribution(p, x, k, mc_samples, seed)
			kind = "monte-carlo-attribution"
		else:
			result = empirical_attribution(p, x, k, threads)
			kind = "oracle"
		logger.info(f"[class {k}] {kind} after {p.queries} predictor queries")

		artifact = self.artifact(kind, result)
		self.write(artifact, output)
		return artifact

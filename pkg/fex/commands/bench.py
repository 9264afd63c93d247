# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import logging
from typing import Any, Dict, Optional

from fex.commands.command import Command
from fex.commons import checkpoint
from fex.commons.evaluation import benchmark_inference
from fex.commons.synthdata import load_csv
from fex.models.reports import Artifact

logger = logging.getLogger(__name__)

class Bench(Command):

	def __init__(self, config: Dict[str, Any], dryrun: bool) -> None:
		super().__init__(config, dryrun)

	@staticmethod
	def execute(
		explainer: str,
		data: str,
		predictor: str = "",
		bridge: str = "",
		mc_samples: int = 100,
		n_explanations: int = 1000,
		seed: int = 0,
		output: str = "",
		config: Optional[Dict[str, Any]] = None,
		dryrun: bool = False
	) -> bool:
		cmd = Bench(config or {}, dryrun)
		return cmd.exec(explainer, data, predictor, bridge, mc_samples, n_explanations, seed, output)

	def run(
		self,
		explainer_path: str,
		data_path: str,
		predictor_path: str,
		bridge: str,
		mc_samples: int,
		n_explanations: int,
		seed: int,
		output: str
	) -> Artifact:
		g = checkpoint.load(explainer_path, "explainer")
		data = load_csv(data_path)
		p = self.open_predictor(predictor_path, bridge)
		self.check_width(data_path, data.n_features, p.n_features)
		self.check_width(explainer_path, g.n_features, p.n_features)

		artifact = self.artifact(
			"benchmark", benchmark_inference(g, p, data, mc_samples, n_explanations, seed)
		)
		self.write(artifact, output)
		return artifact

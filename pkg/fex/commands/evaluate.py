# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import logging
from typing import Any, Dict, Optional

from fex.commands.command import Command
from fex.commons import checkpoint
from fex.commons.evaluation import evaluate_explainer
from fex.commons.synthdata import load_csv
from fex.models.reports import Artifact

logger = logging.getLogger(__name__)

class Evaluate(Command):

	def __init__(self, config: Dict[str, Any], dryrun: bool) -> None:
		super().__init__(config, dryrun)

	@staticmethod
	def execute(
		explainer: str,
		data: str,
		predictor: str = "",
		bridge: str = "",
		metric: str = "probability",
		oracle_samples: int = 20,
		threads: Optional[int] = None,
		curves: str = "",
		output: str = "",
		config: Optional[Dict[str, Any]] = None,
		dryrun: bool = False
	) -> bool:
		cmd = Evaluate(config or {}, dryrun)
		return cmd.exec(explainer, data, predictor, bridge, metric, oracle_samples, threads, curves, output)

	def run(
		self,
		explainer_path: str,
		data_path: str,
		predictor_path: str,
		bridge: str,
		metric: str,
		oracle_samples: int,
		threads: Optional[int],
		curves_prefix: str,
		output: str
	) -> Artifact:
		g = checkpoint.load(explainer_path, "explainer")
		data = load_csv(data_path)
		p = self.open_predictor(predictor_path, bridge)
		self.check_width(data_path, data.n_features, p.n_features)
		self.check_width(explainer_path, g.n_features, p.n_features)

		report = evaluate_explainer(g, p, data, metric, oracle_samples, threads)
		if curves_prefix:
			for name, curve in (("positive", report.mean_positive_curve), ("negative", report.mean_negative_curve)):
				path = f"{curves_prefix}.{name}.csv"
				with open(path, "w", encoding="utf-8") as f:
					f.write(curve.to_csv())
				logger.debug(f"Mean {name} curve written to {path}")

		artifact = self.artifact("evaluation", report)
		self.write(artifact, output)
		return artifact

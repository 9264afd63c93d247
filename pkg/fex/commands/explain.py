# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import logging
from typing import Any, Dict, List, Optional

from fex.commands.command import Command, CommandError
from fex.commons import checkpoint
from fex.commons.synthdata import load_csv
from fex.models.core import Attribution, Sample
from fex.models.reports import Artifact

logger = logging.getLogger(__name__)

class Explain(Command):
	"""One forward pass of the explainer per sample; the predictor is never queried"""

	def __init__(self, config: Dict[str, Any], dryrun: bool) -> None:
		super().__init__(config, dryrun)

	@staticmethod
	def execute(
		explainer: str,
		input: str = "",
		data: str = "",
		class_index: Optional[int] = None,
		output: str = "",
		config: Optional[Dict[str, Any]] = None,
		dryrun: bool = False
	) -> bool:
		cmd = Explain(config or {}, dryrun)
		return cmd.exec(explainer, input, data, class_index, output)

	def run(
		self,
		explainer_path: str,
		input_path: str,
		data_path: str,
		class_index: Optional[int],
		output: str
	) -> Artifact:
		if bool(input_path) == bool(data_path):
			raise CommandError("Give exactly one of --input and --data")
		g = checkpoint.load(explainer_path, "explainer")
		if input_path:
			samples = [Sample.from_file(input_path)]
		else:
			samples = load_csv(data_path).samples()

		results: List[Dict[str, Any]] = []
		for x in samples:
			self.check_width("Sample", x.n_features, g.n_features)
			if class_index is None:
				heads = [Attribution(h, normalized=True) for h in g.explain_all(x)]
			else:
				heads = [g.explain(x, class_index)]
			results.append({
				"classes": [class_index] if class_index is not None else list(range(g.n_classes)),
				"attributions": heads
			})
		logger.debug(f"{len(samples)} samples explained with {g.forward_count} explainer passes")

		artifact = self.artifact("attribution", results[0] if input_path else results)
		self.write(artifact, output)
		return artifact

# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import logging
from typing import Any, Dict, List, Optional

from fex.commands.command import Command
from fex.commons import checkpoint
from fex.commons.synthdata import load_csv
from fex.commons.trainer import run_training
from fex.models.training import TrainingConfig, TrainingLogRecord

logger = logging.getLogger(__name__)

class TrainExplainer(Command):

	def __init__(self, config: Dict[str, Any], dryrun: bool) -> None:
		super().__init__(config, dryrun)

	@staticmethod
	def execute(
		data: str,
		training: TrainingConfig,
		output: str,
		predictor: str = "",
		bridge: str = "",
		value_output: str = "",
		log: str = "",
		config: Optional[Dict[str, Any]] = None,
		dryrun: bool = False
	) -> bool:
		cmd = TrainExplainer(config or {}, dryrun)
		return cmd.exec(data, training, output, predictor, bridge, value_output, log)

	def run(
		self,
		data_path: str,
		training: TrainingConfig,
		output: str,
		predictor_path: str,
		bridge: str,
		value_output: str,
		log_path: str
	) -> List[TrainingLogRecord]:
		data = load_csv(data_path)
		predictor = self.open_predictor(predictor_path, bridge)
		self.check_width(data_path, data.n_features, predictor.n_features)

		log_file = open(log_path, "w", encoding="utf-8") if log_path else None
		try:
			def on_record(record: TrainingLogRecord) -> None:
				logger.debug(f"epoch {record.epoch} batch {record.batch}: return {record.mean_return:.6f}")
				if log_file:
					log_file.write(record.to_json() + "\n")

			g, v, records = run_training(data, predictor, training, on_record)
		finally:
			if log_file:
				log_file.close()

		config = dict(self.config, training=training.encode())
		checkpoint.save(g, output, config, training.seed)
		if value_output:
			checkpoint.save(v, value_output, config, training.seed)
		logger.info(
			f"Explainer written to {output} after {len(records)} batches"
			f" ({predictor.queries} predictor queries)"
		)
		return records

# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from fex.commons.errors import ConfigError
from fex.commons.evaluation import evaluate_explainer
from fex.commons.predictor import train_builtin
from fex.commons.synthdata import LabeledDataset, generate
from fex.commons.trainer import run_training
from fex.models.reports import AblationReport, AblationRow
from fex.models.training import TrainingConfig

logger = logging.getLogger(__name__)

DATA_PARAMETERS = ("train_size",)
METRIC_FIELDS = (
	"positive_auc", "negative_auc", "recovery_precision",
	"head_correlation", "class_argmax_hit_rate", "final_mean_return"
)

def split_task(
	task: str,
	n_features: int,
	train_size: int,
	test_size: int,
	seed: int
) -> Tuple[LabeledDataset, LabeledDataset]:
	data = generate(task, train_size + test_size, n_features, seed)
	return data.subset(range(train_size)), data.subset(range(train_size, train_size + test_size))

def _value_key(value: Any) -> str:
	return ",".join(str(v) for v in value) if isinstance(value, (list, tuple)) else str(value)

def _means(rows: List[AblationRow]) -> Dict[str, Dict[str, Optional[float]]]:
	means = {}
	for key in dict.fromkeys(_value_key(r.value) for r in rows):
		group = [r for r in rows if _value_key(r.value) == key]
		means[key] = {}
		for field in METRIC_FIELDS:
			values = [getattr(r, field) for r in group if getattr(r, field) is not None]
			means[key][field] = float(np.mean(values)) if values else None
	return means

def run_ablation(
	parameter: str,
	values: Sequence[Any],
	seeds: Sequence[int],
	base: TrainingConfig,
	task: str = "planted-2",
	n_features: int = 10,
	train_size: int = 2000,
	test_size: int = 100,
	predictor_epochs: int = 50
) -> AblationReport:
	"""
	Train and evaluate one explainer per (value, seed) with `parameter`
	set to each value. A predictor is trained once per seed and data
	split, and shared by all values.
	"""
	if parameter not in TrainingConfig.FIELDS + DATA_PARAMETERS:
		raise ConfigError(f"Cannot ablate '{parameter}'")
	if not values or not seeds:
		raise ConfigError("Ablation needs at least one value and one seed")

	rows = []
	for seed in seeds:
		predictors = {}
		for value in values:
			size = int(value) if parameter == "train_size" else train_size
			if size not in predictors:
				train, test = split_task(task, n_features, size, test_size, seed)
				predictors[size] = (train_builtin(train, predictor_epochs, seed=seed), train, test)
			predictor, train, test = predictors[size]
			config = base.updated({"seed": seed})
			if parameter != "train_size":
				config = config.updated({parameter: value})
			g, _, log = run_training(train, predictor, config)
			report = evaluate_explainer(g, predictor, test, oracle_samples=0, threads=config.threads)
			row = AblationRow(
				parameter,
				value,
				seed,
				report.positive_auc,
				report.negative_auc,
				report.recovery_precision,
				report.head_correlation,
				report.class_argmax_hit_rate,
				log[-1].mean_return if log else 0.0
			)
			logger.info(
				f"{parameter}={_value_key(value)} seed={seed}: positive AUC {row.positive_auc:.4f},"
				f" recovery {row.recovery_precision}"
			)
			rows.append(row)
	return AblationReport(parameter, rows, _means(rows))

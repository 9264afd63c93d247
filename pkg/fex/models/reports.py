# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

from .base import BaseModel
from .common import Tool
from .core import Attribution
from typing import Any, Dict, List, Optional

class OracleReport(BaseModel):
	def __init__(
		self,
		phi: Optional[Attribution] = None,
		normalization: float = 0.0,
		normalized_phi: Optional[Attribution] = None,
		n_masks_evaluated: int = 0,
		class_index: Optional[int] = None
	) -> None:
		self.phi = Attribution.decode(phi)
		self.normalization = normalization
		self.normalized_phi = Attribution.decode(normalized_phi)
		self.n_masks_evaluated = n_masks_evaluated
		self.class_index = class_index


class CurveReport(BaseModel):
	def __init__(
		self,
		fractions: Optional[List[float]] = None,
		scores: Optional[List[float]] = None,
		auc: float = 0.0,
		order: str = "desc",
		metric: str = "probability"
	) -> None:
		self.fractions = list(fractions or [])
		self.scores = list(scores or [])
		self.auc = auc
		self.order = order
		self.metric = metric

	def to_csv(self) -> str:
		lines = ["fraction,score"]
		lines += [f"{f!r},{s!r}" for f, s in zip(self.fractions, self.scores)]
		return "\n".join(lines) + "\n"


class EvaluationReport(BaseModel):
	def __init__(
		self,
		n_samples: int = 0,
		positive_auc: float = 0.0,
		negative_auc: float = 0.0,
		recovery_precision: Optional[float] = None,
		n_recovery_samples: int = 0,
		mean_positive_curve: Optional[CurveReport] = None,
		mean_negative_curve: Optional[CurveReport] = None,
		oracle_spearman_median: Optional[float] = None,
		oracle_pearson_median: Optional[float] = None,
		head_correlation: Optional[float] = None,
		class_argmax_hit_rate: Optional[float] = None
	) -> None:
		self.n_samples = n_samples
		self.positive_auc = positive_auc
		self.negative_auc = negative_auc
		self.recovery_precision = recovery_precision
		self.n_recovery_samples = n_recovery_samples
		self.mean_positive_curve = CurveReport.decode(mean_positive_curve)
		self.mean_negative_curve = CurveReport.decode(mean_negative_curve)
		self.oracle_spearman_median = oracle_spearman_median
		self.oracle_pearson_median = oracle_pearson_median
		self.head_correlation = head_correlation
		self.class_argmax_hit_rate = class_argmax_hit_rate


class BenchmarkReport(BaseModel):
	def __init__(
		self,
		n_explanations: int = 0,
		mc_samples: int = 0,
		explainer_seconds_per_explanation: float = 0.0,
		mc_seconds_per_explanation: float = 0.0,
		speedup: Optional[float] = 0.0,
		explainer_queries_per_explanation: float = 0.0,
		mc_queries_per_explanation: float = 0.0
	) -> None:
		self.n_explanations = n_explanations
		self.mc_samples = mc_samples
		self.explainer_seconds_per_explanation = explainer_seconds_per_explanation
		self.mc_seconds_per_explanation = mc_seconds_per_explanation
		self.speedup = speedup
		self.explainer_queries_per_explanation = explainer_queries_per_explanation
		self.mc_queries_per_explanation = mc_queries_per_explanation


class AblationRow(BaseModel):
	def __init__(
		self,
		parameter: str = "",
		value: Any = None,
		seed: int = 0,
		positive_auc: float = 0.0,
		negative_auc: float = 0.0,
		recovery_precision: Optional[float] = None,
		head_correlation: Optional[float] = None,
		class_argmax_hit_rate: Optional[float] = None,
		final_mean_return: float = 0.0
	) -> None:
		self.parameter = parameter
		self.value = value
		self.seed = seed
		self.positive_auc = positive_auc
		self.negative_auc = negative_auc
		self.recovery_precision = recovery_precision
		self.head_correlation = head_correlation
		self.class_argmax_hit_rate = class_argmax_hit_rate
		self.final_mean_return = final_mean_return


class AblationReport(BaseModel):
	def __init__(
		self,
		parameter: str = "",
		rows: Optional[List[AblationRow]] = None,
		means: Optional[Dict[str, Dict[str, Optional[float]]]] = None
	) -> None:
		self.parameter = parameter
		self.rows = AblationRow.drilldown(rows)
		self.means = means or {}


class Artifact(BaseModel):
	"""Envelope of every document written by the command line tool"""
	def __init__(
		self,
		kind: str = "",
		result: Any = None,
		config: Optional[Dict[str, Any]] = None,
		tool: Optional[Tool] = None
	) -> None:
		self.kind = kind
		self.result = result
		self.config = config or {}
		self.tool = Tool.decode(tool)

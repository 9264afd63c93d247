# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

import logging
import time
from itertools import combinations
from multiprocessing.pool import ThreadPool
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import pearsonr, spearmanr

from fex.commons.errors import DimensionError, FexError, PreconditionError
from fex.commons.explainer import ExplainerModel
from fex.commons.oracle import empirical_attribution, monte_carlo_attribution
from fex.commons.predictor import Predictor
from fex.commons.settings import Settings
from fex.commons.synthdata import LabeledDataset
from fex.models.core import Attribution, Sample
from fex.models.reports import BenchmarkReport, CurveReport, EvaluationReport, OracleReport

logger = logging.getLogger(__name__)

ORDERS = ("desc", "asc")
METRICS = ("probability", "accuracy")

AttributionSource = Callable[[int, Sample, int], Attribution]

class EvaluationError(FexError):
	category = "undefined"

def _check_choice(name: str, value: str, choices: Sequence[str]) -> None:
	if value not in choices:
		raise PreconditionError(f"Unknown {name} '{value}', choose one of {list(choices)}")

def deletion_curve(
	attr: Attribution,
	p: Predictor,
	x: Sample,
	class_index: int,
	order: str = "desc",
	metric: str = "probability"
) -> CurveReport:
	"""
	Mask d = 0..N features in importance order (`desc` most important
	first, `asc` least important first; ties by feature index) and record
	f_k of the masked input, or whether k is still the predicted class.
	"""
	_check_choice("order", order, ORDERS)
	_check_choice("metric", metric, METRICS)
	n = x.n_features
	if len(attr) != n:
		raise DimensionError(f"Attribution of length {len(attr)} for {n} features")
	p.check_class(class_index)
	ranking = attr.ranking(descending=(order == "desc"))
	keep = np.ones((n + 1, n), dtype=np.int8)
	for d in range(1, n + 1):
		keep[d:, ranking[d - 1]] = 0
	probs = p.predict_batch(np.where(keep == 1, x.features, 0.0))
	if metric == "probability":
		scores = probs[:, class_index]
	else:
		scores = (np.argmax(probs, axis=1) == class_index).astype(np.float64)
	fractions = np.arange(n + 1) / n
	return CurveReport(
		fractions.tolist(), scores.tolist(), float(trapezoid(scores, fractions)), order, metric
	)

def _mean_curve(curves: List[CurveReport]) -> CurveReport:
	scores = np.mean([c.scores for c in curves], axis=0)
	fractions = np.asarray(curves[0].fractions)
	return CurveReport(
		fractions.tolist(),
		scores.tolist(),
		float(trapezoid(scores, fractions)),
		curves[0].order,
		curves[0].metric
	)

def explained_classes(p: Predictor, data: LabeledDataset) -> np.ndarray:
	return np.argmax(p.predict_batch(data.features), axis=1)

def batch_curves(
	source: AttributionSource,
	p: Predictor,
	data: LabeledDataset,
	metric: str = "probability",
	threads: Optional[int] = None
) -> Tuple[CurveReport, CurveReport]:
	"""Mean desc and asc curves over a dataset, each sample explained for its argmax class"""
	if not data.n_samples:
		raise PreconditionError("Cannot evaluate an empty dataset")
	classes = explained_classes(p, data)
	threads = Settings.THREADS if threads is None else threads

	def curves(i: int) -> Tuple[CurveReport, CurveReport]:
		x, k = data.sample(i), int(classes[i])
		attr = source(i, x, k)
		return tuple(deletion_curve(attr, p, x, k, order, metric) for order in ORDERS)

	if threads > 1 and p.thread_safe and data.n_samples > 1:
		with ThreadPool(min(threads, data.n_samples)) as tpool:
			parts = tpool.map(curves, range(data.n_samples))
	else:
		parts = [curves(i) for i in range(data.n_samples)]
	return _mean_curve([c[0] for c in parts]), _mean_curve([c[1] for c in parts])

def batch_auc(
	source: AttributionSource,
	p: Predictor,
	data: LabeledDataset,
	metric: str = "probability",
	threads: Optional[int] = None
) -> Tuple[float, float]:
	"""(positive AUC, negative AUC): lower is better for the first, higher for the second"""
	positive, negative = batch_curves(source, p, data, metric, threads)
	return positive.auc, negative.auc

def recovery_precision(attr: Attribution, true_features: Iterable[int], k: int) -> float:
	truth = set(true_features)
	if k > len(attr):
		raise DimensionError(f"Cannot take the top {k} of {len(attr)} features")
	if k < 1 or k != len(truth):
		raise PreconditionError(f"k = {k} must equal the number of true features ({len(truth)})")
	return len(truth.intersection(attr.top_k(k))) / k

def oracle_agreement(attr: Attribution, report: OracleReport) -> Tuple[float, float]:
	"""(Pearson, Spearman) correlation with the normalized oracle attribution"""
	reference = report.normalized_phi.values
	if len(attr) != len(reference):
		raise DimensionError(f"Attribution of length {len(attr)} against oracle of {len(reference)}")
	if np.ptp(attr.values) == 0.0 or np.ptp(reference) == 0.0:
		raise EvaluationError("Correlation with a constant attribution is undefined")
	return (
		float(pearsonr(attr.values, reference)[0]),
		float(spearmanr(attr.values, reference)[0])
	)

def head_correlation(g: ExplainerModel, samples: Sequence[Sample]) -> Optional[float]:
	"""Mean Pearson correlation between the heads of distinct classes; None if undefined"""
	if g.n_classes < 2:
		return None
	values = []
	for x in samples:
		heads = g.explain_all(x)
		for a, b in combinations(range(g.n_classes), 2):
			if np.ptp(heads[a]) > 0.0 and np.ptp(heads[b]) > 0.0:
				values.append(pearsonr(heads[a], heads[b])[0])
	return float(np.mean(values)) if values else None

def class_argmax_hit_rate(g: ExplainerModel, data: LabeledDataset) -> Optional[float]:
	"""Share of (sample, class) pairs whose head argmax lies in that class's ground truth"""
	hits = []
	for x in data.samples():
		heads = g.explain_all(x)
		for k in range(g.n_classes):
			truth = data.ground_truth_for(k)
			if truth:
				hits.append(Attribution(heads[k], normalized=True).argmax() in truth)
	return float(np.mean(hits)) if hits else None

def random_source(seed: int = 0) -> AttributionSource:
	"""Uniform scores; sample i always draws from a generator seeded with (seed, i)"""
	return lambda i, x, k: Attribution(
		np.random.default_rng([seed, i]).random(x.n_features), normalized=True
	)

def oracle_source(p: Predictor, threads: int = 1) -> AttributionSource:
	return lambda i, x, k: empirical_attribution(p, x, k, threads=threads).normalized_phi

def explainer_source(g: ExplainerModel) -> AttributionSource:
	return lambda i, x, k: g.explain(x, k)

def evaluate_explainer(
	g: ExplainerModel,
	p: Predictor,
	data: LabeledDataset,
	metric: str = "probability",
	oracle_samples: int = 20,
	threads: Optional[int] = None
) -> EvaluationReport:
	positive, negative = batch_curves(explainer_source(g), p, data, metric, threads)
	classes = explained_classes(p, data)

	precisions = []
	for i, k in enumerate(classes):
		truth = data.ground_truth_for(int(k))
		if truth:
			precisions.append(recovery_precision(g.explain(data.sample(i), int(k)), truth, len(truth)))

	pearsons, spearmans = [], []
	if oracle_samples and data.n_features <= Settings.MAX_ORACLE_FEATURES:
		for i in range(min(oracle_samples, data.n_samples)):
			x, k = data.sample(i), int(classes[i])
			try:
				pearson, spearman = oracle_agreement(
					g.explain(x, k), empirical_attribution(p, x, k, threads=threads)
				)
			except FexError as ex:
				logger.debug(f"Sample {i} skipped in oracle agreement: {ex}")
				continue
			pearsons.append(pearson)
			spearmans.append(spearman)

	report = EvaluationReport(
		data.n_samples,
		positive.auc,
		negative.auc,
		float(np.mean(precisions)) if precisions else None,
		len(precisions),
		positive,
		negative,
		float(np.median(spearmans)) if spearmans else None,
		float(np.median(pearsons)) if pearsons else None,
		head_correlation(g, data.samples()),
		class_argmax_hit_rate(g, data)
	)
	logger.info(
		f"Positive AUC {report.positive_auc:.4f}, negative AUC {report.negative_auc:.4f},"
		f" recovery precision {report.recovery_precision}"
	)
	return report

def benchmark_inference(
	g: ExplainerModel,
	p: Predictor,
	data: LabeledDataset,
	mc_samples: int = 100,
	n_explanations: Optional[int] = None,
	seed: int = 0,
	timer: Callable[[], float] = time.perf_counter
) -> BenchmarkReport:
	"""
	Time one explainer forward pass against a Monte Carlo estimate with
	`mc_samples` predictor queries, per explanation, and count the
	predictor queries of each path. Explained classes are computed up front.
	"""
	if not data.n_samples:
		raise PreconditionError("Cannot benchmark on an empty dataset")
	n = n_explanations or data.n_samples
	samples = [data.sample(i % data.n_samples) for i in range(n)]
	classes = explained_classes(p, data)
	classes = [int(classes[i % data.n_samples]) for i in range(n)]

	g.explain(samples[0], classes[0])
	monte_carlo_attribution(p, samples[0], classes[0], mc_samples, seed)

	queries = p.queries
	start = timer()
	for x, k in zip(samples, classes):
		g.explain(x, k)
	explainer_seconds = timer() - start
	explainer_queries = p.queries - queries

	queries = p.queries
	start = timer()
	for i, (x, k) in enumerate(zip(samples, classes)):
		monte_carlo_attribution(p, x, k, mc_samples, [seed, i])
	mc_seconds = timer() - start
	mc_queries = p.queries - queries

	report = BenchmarkReport(
		n,
		mc_samples,
		explainer_seconds / n,
		mc_seconds / n,
		mc_seconds / explainer_seconds if explainer_seconds > 0 else None,
		explainer_queries / n,
		mc_queries / n
	)
	speedup = "unmeasurable" if report.speedup is None else f"{report.speedup:.1f}x"
	logger.info(
		f"{n} explanations: explainer {report.explainer_seconds_per_explanation * 1e6:.1f} us,"
		f" Monte Carlo {report.mc_seconds_per_explanation * 1e6:.1f} us, speedup {speedup}"
	)
	return report

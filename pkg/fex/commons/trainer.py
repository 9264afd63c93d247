# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: fex contributors

"""
PPO training of the explainer g against a black-box predictor.

All losses are computed on clamped head outputs lambda of shape (B, K, N)
and differentiated with respect to lambda in closed form; the result is
pushed through the sigmoid output layer by MlpNetwork.backward. Only the
head of the explained class y receives surrogate and entropy gradients,
every head receives the KL gradient.
"""

import logging
import math
from multiprocessing.pool import ThreadPool
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import log_softmax

from fex.commons.errors import FexError, NumericError, PreconditionError
from fex.commons.explainer import ExplainerModel, ValueModel
from fex.commons.nnet import AdamState, GradientBundle, adam_step
from fex.commons.policy import (
	BernoulliPolicy, entropy_gradient_rows, entropy_rows, log_prob_rows, score_rows
)
from fex.commons.predictor import Predictor, naive_scores
from fex.commons.settings import Settings
from fex.commons.synthdata import LabeledDataset
from fex.models.core import ProbVector, Sample
from fex.models.training import LossComponents, TrainingConfig, TrainingLogRecord

logger = logging.getLogger(__name__)

F_FLOOR = 1e-9

Batch = Sequence[Tuple[Sample, int]]
SeedPath = Union[int, Sequence[int]]

class TrainerError(FexError):
	category = "divergence"


class Trajectory:
	"""T masks drawn for one (sample, class) pair, their scores and log q at collection time"""

	def __init__(
		self,
		masks: np.ndarray,
		scores: np.ndarray,
		behavior_log_probs: np.ndarray,
		sample_index: int,
		class_index: int,
		features: np.ndarray
	) -> None:
		self.masks = np.asarray(masks, dtype=np.int8)
		self.scores = np.asarray(scores, dtype=np.float64)
		self.behavior_log_probs = np.asarray(behavior_log_probs, dtype=np.float64)
		if not (
			self.masks.ndim == 2
			and len(self.masks) == len(self.scores) == len(self.behavior_log_probs) >= 1
		):
			raise PreconditionError(
				f"Trajectory needs T >= 1 masks, scores and log-probabilities of equal length"
			)
		self.sample_index = sample_index
		self.class_index = class_index
		self.features = np.asarray(features, dtype=np.float64)

	@property
	def T(self) -> int:
		return len(self.scores)


def _seed_path(seed: SeedPath) -> List[int]:
	return [int(seed)] if np.isscalar(seed) else [int(s) for s in seed]

def collect_trajectories(
	g: ExplainerModel,
	p: Predictor,
	batch: Batch,
	T: int,
	seed: SeedPath = 0,
	threads: int = 1
) -> List[Trajectory]:
	"""
	One trajectory of T i.i.d. masks per batch entry, drawn from
	Bern(g_k(x)). Sample j draws from its own generator seeded with
	(*seed, j), so the result does not depend on `threads`.
	"""
	if T < 1:
		raise PreconditionError(f"Trajectory length must be >= 1, got {T}")
	if not batch:
		return []
	rows = np.stack([x.features for x, _ in batch])
	lam, _ = g.lambdas(rows)
	path = _seed_path(seed)

	def collect(j: int) -> Trajectory:
		x, k = batch[j]
		policy = BernoulliPolicy(lam[j, k])
		masks = policy.sample_matrix(T, np.random.default_rng(path + [j]))
		return Trajectory(
			masks,
			naive_scores(p, masks, x.features, k),
			log_prob_rows(policy.lam, masks),
			j,
			k,
			x.features
		)

	if threads > 1 and p.thread_safe and len(batch) > 1:
		with ThreadPool(min(threads, len(batch))) as tpool:
			return tpool.map(collect, range(len(batch)))
	return [collect(j) for j in range(len(batch))]

def trajectory_return(traj: Trajectory) -> float:
	return float(np.mean(traj.scores))

def advantage(score: float, value: float, T: int) -> float:
	if T < 1:
		raise PreconditionError(f"Trajectory length must be >= 1, got {T}")
	return (score - value) / T


def _stack(trajectories: Sequence[Trajectory]):
	if not trajectories:
		raise PreconditionError("No trajectories given")
	lengths = {t.T for t in trajectories}
	if len(lengths) != 1:
		raise PreconditionError(f"Trajectories of unequal length: {sorted(lengths)}")
	rows = np.stack([t.features for t in trajectories])
	classes = np.array([t.class_index for t in trajectories])
	masks = np.stack([t.masks for t in trajectories])
	scores = np.stack([t.scores for t in trajectories])
	behavior = np.stack([t.behavior_log_probs for t in trajectories])
	return rows, classes, masks, scores, behavior

def _advantages(
	scores: np.ndarray,
	values: np.ndarray,
	normalize: bool = False
) -> np.ndarray:
	adv = (scores - np.asarray(values, dtype=np.float64)[:, None]) / scores.shape[1]
	if normalize and adv.size > 1:
		adv = (adv - adv.mean()) / (adv.std() + 1e-8)
	return adv

def _surrogate_terms(
	lam_y: np.ndarray,
	masks: np.ndarray,
	behavior: np.ndarray,
	adv: np.ndarray,
	clip_eps: float
) -> Tuple[float, np.ndarray, float]:
	"""
	Mean clipped surrogate over (B, T), its gradient with respect to the
	explained heads lam_y (B, N), and the largest probability ratio.
	"""
	log_q = log_prob_rows(lam_y[:, None, :], masks)
	ratio = np.exp(log_q - behavior)
	if not np.all(np.isfinite(ratio)):
		raise NumericError(f"Non-finite probability ratio (max log-ratio {np.max(log_q - behavior)})")
	unclipped = ratio * adv
	clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv
	weight = np.where(unclipped <= clipped, unclipped, 0.0) / adv.size
	grad = (weight[:, :, None] * score_rows(lam_y[:, None, :], masks)).sum(axis=1)
	return float(np.minimum(unclipped, clipped).mean()), grad, float(ratio.max())

def _entropy_terms(lam_y: np.ndarray) -> Tuple[float, np.ndarray]:
	return float(entropy_rows(lam_y).mean()), entropy_gradient_rows(lam_y) / len(lam_y)

def _value_terms(
	outputs: np.ndarray,
	classes: np.ndarray,
	scores: np.ndarray
) -> Tuple[float, np.ndarray]:
	"""Value MSE averaged over trajectories and its gradient w.r.t. all K outputs"""
	rows = np.arange(len(classes))
	diff = scores - outputs[rows, classes][:, None]
	upstream = np.zeros_like(outputs)
	upstream[rows, classes] = -2.0 * diff.mean(axis=1) / len(classes)
	return float((diff ** 2).mean(axis=1).mean()), upstream

def _kl_terms(lam: np.ndarray, f_probs: np.ndarray) -> Tuple[float, np.ndarray]:
	"""
	KL(softmax(s) || f) with s_k the mean log head output of class k,
	averaged over the batch, and its gradient w.r.t. lam (B, K, N).
	"""
	n = lam.shape[2]
	log_p = log_softmax(np.log(lam).mean(axis=2), axis=1)
	p_hat = np.exp(log_p)
	log_ratio = log_p - np.log(np.maximum(f_probs, F_FLOOR))
	kl = (p_hat * log_ratio).sum(axis=1)
	d_s = p_hat * (log_ratio - kl[:, None])
	grad = d_s[:, :, None] / (n * lam) / len(lam)
	return float(kl.mean()), grad

def _backprop(
	g: ExplainerModel,
	rows: np.ndarray,
	grad_lam: np.ndarray,
	passthrough: np.ndarray
) -> GradientBundle:
	upstream = (grad_lam * passthrough).reshape(len(rows), -1)
	return g.network.backward(rows, upstream)

def _explained(g: ExplainerModel, rows: np.ndarray, classes: np.ndarray):
	lam, passthrough = g.lambdas(rows)
	return lam, passthrough, lam[np.arange(len(classes)), classes]


def ppo_surrogate(
	g: ExplainerModel,
	trajectories: Sequence[Trajectory],
	values: Sequence[float],
	clip_eps: float = 0.2
) -> float:
	rows, classes, masks, scores, behavior = _stack(trajectories)
	_, _, lam_y = _explained(g, rows, classes)
	value, _, _ = _surrogate_terms(lam_y, masks, behavior, _advantages(scores, values), clip_eps)
	return value

def ppo_surrogate_gradient(
	g: ExplainerModel,
	trajectories: Sequence[Trajectory],
	values: Sequence[float],
	clip_eps: float = 0.2
) -> GradientBundle:
	"""Gradient of the clipped surrogate (ascent direction) w.r.t. the parameters of g"""
	rows, classes, masks, scores, behavior = _stack(trajectories)
	lam, passthrough, lam_y = _explained(g, rows, classes)
	_, d_lam_y, _ = _surrogate_terms(lam_y, masks, behavior, _advantages(scores, values), clip_eps)
	grad = np.zeros_like(lam)
	grad[np.arange(len(classes)), classes] = d_lam_y
	return _backprop(g, rows, grad, passthrough)

def vanilla_policy_gradient(
	g: ExplainerModel,
	trajectories: Sequence[Trajectory],
	values: Sequence[float]
) -> GradientBundle:
	"""Mean of grad log q(m_t) * A_t over all trajectory steps"""
	rows, classes, masks, scores, _ = _stack(trajectories)
	lam, passthrough, lam_y = _explained(g, rows, classes)
	adv = _advantages(scores, values)
	d_lam_y = (adv[:, :, None] * score_rows(lam_y[:, None, :], masks)).sum(axis=1) / adv.size
	grad = np.zeros_like(lam)
	grad[np.arange(len(classes)), classes] = d_lam_y
	return _backprop(g, rows, grad, passthrough)

def mean_entropy(g: ExplainerModel, trajectories: Sequence[Trajectory]) -> float:
	rows, classes, _, _, _ = _stack(trajectories)
	_, _, lam_y = _explained(g, rows, classes)
	return _entropy_terms(lam_y)[0]

def value_loss(v: ValueModel, trajectories: Sequence[Trajectory]) -> float:
	rows, classes, _, scores, _ = _stack(trajectories)
	return _value_terms(v.values(rows), classes, scores)[0]

def value_loss_gradient(v: ValueModel, trajectories: Sequence[Trajectory]) -> GradientBundle:
	rows, classes, _, scores, _ = _stack(trajectories)
	_, upstream = _value_terms(v.values(rows), classes, scores)
	return v.network.backward(rows, upstream)

def kl_regularizer(g: ExplainerModel, f_probs: ProbVector, x: Sample) -> float:
	lam, _ = g.lambdas(x.features[None, :])
	return _kl_terms(lam, f_probs.probs[None, :])[0]

def kl_regularizer_gradient(g: ExplainerModel, f_probs: ProbVector, x: Sample) -> GradientBundle:
	rows = x.features[None, :]
	lam, passthrough = g.lambdas(rows)
	_, grad = _kl_terms(lam, f_probs.probs[None, :])
	return _backprop(g, rows, grad, passthrough)

def total_loss(components: LossComponents, config: TrainingConfig) -> float:
	return (
		- components.surrogate
		- config.lambda_en * components.entropy
		+ config.lambda_v * components.value_loss
		+ config.lambda_kl * components.kl
	)


class _Optimizer:
	"""Adam states of g and v, and one joint update on the total loss"""

	def __init__(self, g: ExplainerModel, v: ValueModel, config: TrainingConfig) -> None:
		self.g = g
		self.v = v
		self.config = config
		self.g_state = AdamState(g.network)
		self.v_state = AdamState(v.network)

	def step(
		self,
		trajectories: Sequence[Trajectory],
		values: np.ndarray,
		f_probs: np.ndarray
	) -> LossComponents:
		cfg = self.config
		rows, classes, masks, scores, behavior = _stack(trajectories)
		picked = np.arange(len(classes))
		adv = _advantages(scores, values, cfg.normalize_advantages)

		lam, passthrough = self.g.lambdas(rows)
		lam_y = lam[picked, classes]
		surrogate, d_surrogate, max_ratio = _surrogate_terms(lam_y, masks, behavior, adv, cfg.clip_eps)
		entropy, d_entropy = _entropy_terms(lam_y)
		kl, d_kl = _kl_terms(lam, f_probs)
		v_loss, d_values = _value_terms(self.v.values(rows), classes, scores)

		comps = LossComponents(surrogate, entropy, v_loss, kl, max_ratio)
		comps.total = total_loss(comps, cfg)
		if not np.isfinite(comps.total):
			raise TrainerError(f"Non-finite loss: {comps.encode()}")

		grad = cfg.lambda_kl * d_kl
		grad[picked, classes] -= d_surrogate + cfg.lambda_en * d_entropy
		adam_step(self.g.network, _backprop(self.g, rows, grad, passthrough), self.g_state, cfg.lr)
		adam_step(
			self.v.network,
			self.v.network.backward(rows, cfg.lambda_v * d_values),
			self.v_state,
			cfg.lr
		)
		return comps


POLICY_GAP = 0.01
FLAT_STDERRS = 3.0

EpochReturn = Tuple[float, float]

def policy_gap(g: ExplainerModel, rows: np.ndarray) -> float:
	"""Mean |lambda - 0.5| over every head of the given rows"""
	lam, _ = g.lambdas(rows)
	return float(np.mean(np.abs(lam - 0.5)))

def return_is_flat(previous: EpochReturn, current: EpochReturn) -> bool:
	"""
	Epoch returns are (mean, squared standard error) pairs. The return is
	flat when it moved by at most FLAT_STDERRS standard errors.
	"""
	(a, var_a), (b, var_b) = previous, current
	return abs(b - a) <= FLAT_STDERRS * math.sqrt(var_a + var_b)

def stalled(gaps: Sequence[float], returns: Sequence[EpochReturn], epochs: int) -> bool:
	"""
	True when every epoch from the halfway point on kept the policy within
	POLICY_GAP of 0.5 and a return flat against the epoch before.
	"""
	if epochs < 2 or len(gaps) < epochs or len(returns) < epochs:
		return False
	start = (epochs - 1) // 2
	if any(gap >= POLICY_GAP for gap in gaps[start:epochs]):
		return False
	return all(return_is_flat(returns[e - 1], returns[e]) for e in range(max(start, 1), epochs))

def _epoch_return(batch_means: List[float], batch_variances: List[float]) -> EpochReturn:
	n = len(batch_means)
	return float(np.mean(batch_means)), float(np.sum(batch_variances)) / (n * n)

def run_training(
	data: LabeledDataset,
	predictor: Predictor,
	config: TrainingConfig,
	on_record: Optional[Callable[[TrainingLogRecord], None]] = None
) -> Tuple[ExplainerModel, ValueModel, List[TrainingLogRecord]]:
	"""
	Per batch: y = argmax f(x); `collections` times collect one trajectory
	per sample under Bern(g_y(x)), compute advantages with the current
	value network, and take `inner_updates` Adam steps against the frozen
	behavior log-probabilities. One log record per batch.
	"""
	config.validate()
	if not data.n_samples:
		raise PreconditionError("Cannot train an explainer on an empty dataset")
	if data.n_features != predictor.n_features or data.n_classes != predictor.n_classes:
		raise PreconditionError(
			f"Dataset ({data.n_features} features, {data.n_classes} classes) does not fit"
			f" predictor ({predictor.n_features} features, {predictor.n_classes} classes)"
		)
	g = ExplainerModel.create(data.n_features, data.n_classes, config.hidden_sizes, config.seed)
	v = ValueModel.create(data.n_features, data.n_classes, config.hidden_sizes, config.seed + 1)
	records: List[TrainingLogRecord] = []
	if config.epochs == 0:
		return g, v, records

	threads = Settings.THREADS if config.threads is None else config.threads
	optimizer = _Optimizer(g, v, config)
	rng = np.random.default_rng(config.seed)
	gap_rows = data.features[:256]
	gaps: List[float] = []
	epoch_returns: List[EpochReturn] = []

	for epoch in range(config.epochs):
		order = rng.permutation(data.n_samples)
		returns, variances = [], []
		for b, start in enumerate(range(0, data.n_samples, config.batch_size)):
			idx = order[start:start + config.batch_size]
			rows = data.features[idx]
			f_probs = predictor.predict_batch(rows)
			classes = np.argmax(f_probs, axis=1)
			batch = [(Sample(row), int(k)) for row, k in zip(rows, classes)]
			for c in range(config.collections):
				trajectories = collect_trajectories(
					g, predictor, batch, config.T, [config.seed, epoch, b, c], threads
				)
				values = v.values(rows)[np.arange(len(idx)), classes]
				for _ in range(config.inner_updates):
					comps = optimizer.step(trajectories, values, f_probs)
			batch_returns = np.array([trajectory_return(t) for t in trajectories])
			mean_return = float(batch_returns.mean())
			returns.append(mean_return)
			variances.append(
				float(batch_returns.var(ddof=1)) / len(batch_returns) if len(batch_returns) > 1 else 0.0
			)
			record = TrainingLogRecord(
				epoch, b, mean_return, comps.surrogate, comps.value_loss, comps.kl, comps.entropy
			)
			records.append(record)
			if on_record:
				on_record(record)
		epoch_returns.append(_epoch_return(returns, variances))
		gaps.append(policy_gap(g, gap_rows))
		logger.info(
			f"Epoch {epoch + 1}/{config.epochs}: mean return {epoch_returns[-1][0]:.6f},"
			f" kl {comps.kl:.5f}, value loss {comps.value_loss:.6f}, max ratio {comps.max_ratio:.3f}"
		)
	if config.divergence_guard and stalled(gaps, epoch_returns, config.epochs):
		raise TrainerError(
			f"No learning signal after {config.epochs} epochs: policy stayed within"
			f" {POLICY_GAP} of 0.5 and the return stayed flat from the halfway point on"
		)
	return g, v, records

def fit_value_model(
	v: ValueModel,
	g: ExplainerModel,
	p: Predictor,
	batch: Batch,
	T: int = 5,
	steps: int = 1000,
	lr: float = 1e-3,
	seed: int = 0
) -> List[float]:
	"""
	Regress v on fresh trajectories of a frozen policy g. Returns the
	value loss of every step.
	"""
	state = AdamState(v.network)
	losses = []
	for step in range(steps):
		trajectories = collect_trajectories(g, p, batch, T, [seed, step])
		rows, classes, _, scores, _ = _stack(trajectories)
		loss, upstream = _value_terms(v.values(rows), classes, scores)
		adam_step(v.network, v.network.backward(rows, upstream), state, lr)
		losses.append(loss)
	return losses

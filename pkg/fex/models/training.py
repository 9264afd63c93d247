# SPDX-FileCopyrightText: fex contributors
#
# SPDX-License-Identifier: Apache-2.0

from .base import BaseModel
from typing import Any, Dict, List, Optional

from fex.commons.errors import ConfigError

class TrainingConfig(BaseModel):
	"""
	Hyperparameters of explainer training. Defaults: trajectory length 5,
	entropy weight 1e-5, value weight 0.5, KL weight 1. `inner_updates=1`
	together with `collections>1` recollects before every update.
	"""

	FIELDS = (
		"T", "clip_eps", "lambda_en", "lambda_v", "lambda_kl", "inner_updates",
		"collections", "batch_size", "epochs", "lr", "seed", "hidden_sizes",
		"normalize_advantages", "divergence_guard", "threads"
	)

	def __init__(
		self,
		T: int = 5,
		clip_eps: float = 0.2,
		lambda_en: float = 1e-5,
		lambda_v: float = 0.5,
		lambda_kl: float = 1.0,
		inner_updates: int = 4,
		collections: int = 1,
		batch_size: int = 64,
		epochs: int = 10,
		lr: float = 1e-3,
		seed: int = 0,
		hidden_sizes: Optional[List[int]] = None,
		normalize_advantages: bool = False,
		divergence_guard: bool = True,
		threads: Optional[int] = None
	) -> None:
		self.T = T
		self.clip_eps = clip_eps
		self.lambda_en = lambda_en
		self.lambda_v = lambda_v
		self.lambda_kl = lambda_kl
		self.inner_updates = inner_updates
		self.collections = collections
		self.batch_size = batch_size
		self.epochs = epochs
		self.lr = lr
		self.seed = seed
		self.hidden_sizes = list(hidden_sizes) if hidden_sizes is not None else [32]
		self.normalize_advantages = normalize_advantages
		self.divergence_guard = divergence_guard
		self.threads = threads

	def validate(self) -> "TrainingConfig":
		problems = []
		if self.T < 1:
			problems.append(f"T must be >= 1 (got {self.T})")
		if not 0 < self.clip_eps < 1:
			problems.append(f"clip_eps must lie in (0, 1) (got {self.clip_eps})")
		for name in ("lambda_en", "lambda_v", "lambda_kl"):
			if getattr(self, name) < 0:
				problems.append(f"{name} must be >= 0 (got {getattr(self, name)})")
		for name in ("inner_updates", "collections", "batch_size"):
			if getattr(self, name) < 1:
				problems.append(f"{name} must be >= 1 (got {getattr(self, name)})")
		if self.epochs < 0:
			problems.append(f"epochs must be >= 0 (got {self.epochs})")
		if not self.lr > 0:
			problems.append(f"lr must be > 0 (got {self.lr})")
		if any(h < 1 for h in self.hidden_sizes):
			problems.append(f"hidden_sizes must be positive (got {self.hidden_sizes})")
		if problems:
			raise ConfigError("; ".join(problems))
		return self

	def updated(self, values: Dict[str, Any]) -> "TrainingConfig":
		"""Copy with the given fields replaced; None values are ignored"""
		unknown = set(values) - set(TrainingConfig.FIELDS)
		if unknown:
			raise ConfigError(f"Unknown training options: {sorted(unknown)}")
		merged = dict(self.encode())
		merged.update({k: v for k, v in values.items() if v is not None})
		return TrainingConfig(**merged)


class TrainingLogRecord(BaseModel):
	def __init__(
		self,
		epoch: int = 0,
		batch: int = 0,
		mean_return: float = 0.0,
		surrogate: float = 0.0,
		value_loss: float = 0.0,
		kl: float = 0.0,
		entropy: float = 0.0
	) -> None:
		self.epoch = epoch
		self.batch = batch
		self.mean_return = mean_return
		self.surrogate = surrogate
		self.value_loss = value_loss
		self.kl = kl
		self.entropy = entropy


class LossComponents(BaseModel):
	def __init__(
		self,
		surrogate: float = 0.0,
		entropy: float = 0.0,
		value_loss: float = 0.0,
		kl: float = 0.0,
		max_ratio: float = 1.0,
		total: float = 0.0
	) -> None:
		self.surrogate = surrogate
		self.entropy = entropy
		self.value_loss = value_loss
		self.kl = kl
		self.max_ratio = max_ratio
		self.total = total

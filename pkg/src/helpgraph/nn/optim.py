from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .autodiff import NumericError, Tensor

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params) -> "AdamState":
        arrays = [p.data if isinstance(p, Tensor) else np.asarray(p) for p in params]
        return cls([np.zeros_like(a) for a in arrays], [np.zeros_like(a) for a in arrays], 0)


def adam_step(params: list[Tensor], grads: list[np.ndarray], state: AdamState,
              lr: float, weight_decay: float = 0.0) -> AdamState:
    """One Adam update in place on ``params``.

    Weight decay is the coupled L2 form: ``weight_decay * param`` is added to
    the gradient before the moment updates.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads and state disagree in length")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient passed to adam_step")
    state.t += 1
    t = state.t
    c1 = 1.0 - BETA1 ** t
    c2 = 1.0 - BETA2 ** t
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ValueError(f"shape mismatch for {p.name}: {p.shape} vs {g.shape}")
        if weight_decay:
            g = g + weight_decay * p.data
        state.m[i] = BETA1 * state.m[i] + (1.0 - BETA1) * g
        state.v[i] = BETA2 * state.v[i] + (1.0 - BETA2) * (g * g)
        m_hat = state.m[i] / c1
        v_hat = state.v[i] / c2
        p.data = p.data - lr * m_hat / (np.sqrt(v_hat) + EPS)
    return state


@dataclass
class TrainSchedule:
    initial_lr: float = 0.001
    decay_ratio: float = 0.1
    decay_every: int = 20
    weight_decay: float = 1e-5
    epochs: int = 60
    repetitions: int = 10
    batch_size: int = 256
    pair_batch_size: int = 256
    steps_per_epoch: int = 60

    def __post_init__(self):
        if self.initial_lr <= 0 or self.decay_every <= 0 or self.weight_decay < 0:
            raise ValueError("schedule values must be positive")
        if not 0 < self.decay_ratio <= 1:
            raise ValueError("decay_ratio must lie in (0, 1]")
        if self.epochs < 0 or self.repetitions < 1:
            raise ValueError("epochs must be >= 0 and repetitions >= 1")
        if self.batch_size < 1 or self.pair_batch_size < 1 or self.steps_per_epoch < 1:
            raise ValueError("batch sizes and steps_per_epoch must be >= 1")

    def steps_for(self, n_labeled: int) -> int:
        """Optimizer steps per epoch: enough to pass every labeled domain once."""
        return max(self.steps_per_epoch, math.ceil(n_labeled / self.batch_size))


def lr_at_epoch(s: TrainSchedule, epoch: int) -> float:
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    return s.initial_lr * s.decay_ratio ** (epoch // s.decay_every)

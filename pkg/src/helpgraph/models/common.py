from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..nn import AdamState, Tensor, TrainSchedule, adam_step, lr_at_epoch, value_and_gradient

# Each random stream a model consumes is keyed by role, so models that share
# a block role (MLP trunk and HELP's domain tower, say) start from identical
# parameters under the same seed.
ROLES = {
    "h_d": 0,
    "h_u": 1,
    "f": 2,
    "g": 3,
    "order": 4,
    "pairs": 5,
    "context": 6,
    "context_init": 7,
    "edges": 8,
}


def role_seed(seed: int, role: str) -> int:
    return int(np.random.SeedSequence([int(seed), ROLES[role]]).generate_state(1)[0])


def role_rng(seed: int, role: str) -> np.random.Generator:
    return np.random.default_rng(role_seed(seed, role))


@dataclass
class TrainLog:
    epoch_loss: list[float] = field(default_factory=list)
    step_loss: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"epoch_loss": list(self.epoch_loss), "step_loss": list(self.step_loss)}


def fit(params: list[Tensor], batch_loss: Callable[[np.ndarray], Tensor], n_train: int,
        sched: TrainSchedule, seed: int) -> TrainLog:
    """Shared epoch loop.

    ``batch_loss(idx)`` builds the total loss for a mini-batch of positions
    into the training set; any auxiliary sampling (pairs, contexts, edges)
    happens inside it from the model's own streams. One joint Adam step is
    taken per batch.
    """
    if n_train < 1:
        raise ValueError("training set is empty")
    log = TrainLog()
    state = AdamState.zeros_like(params)
    order_rng = role_rng(seed, "order")
    bs = min(sched.batch_size, n_train)
    steps = sched.steps_for(n_train)
    for epoch in range(sched.epochs):
        lr = lr_at_epoch(sched, epoch)
        perm = order_rng.permutation(n_train)
        pos = 0
        losses = []
        for _ in range(steps):
            idx = perm[(pos + np.arange(bs)) % n_train]
            pos = (pos + bs) % n_train
            value, grads = value_and_gradient(lambda: batch_loss(idx), params)
            adam_step(params, grads, state, lr, sched.weight_decay)
            losses.append(value)
        log.step_loss.extend(losses)
        log.epoch_loss.append(float(np.mean(losses)))
    return log

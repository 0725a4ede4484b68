"""Supervised and graph-regularization losses.

Every function is vectorized: it takes arrays or :class:`Tensor` values of
per-item quantities and returns a Tensor of per-item losses, so the same
code serves scalar spot checks and batched training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import autodiff as ad
from .nn.autodiff import Tensor

PROB_EPS = 1e-12
DIST_EPS = 1e-12
NORM_EPS = 1e-12

# losses that read the similarity head output g(concat(e_d, e_u))
HEAD_KINDS = ("contrastive", "reg_l1", "reg_l2", "smooth_l1", "cross_entropy")
# losses that compare the two embeddings directly
EMBED_KINDS = ("cosine_embed", "l1_embed", "l2_embed")
LOSS_KINDS = HEAD_KINDS[:1] + EMBED_KINDS + HEAD_KINDS[1:]
REGRESSION_KINDS = ("reg_l1", "reg_l2", "smooth_l1")


@dataclass(frozen=True)
class LossSpec:
    kind: str = "contrastive"
    margin: float = 0.2
    lam: float = 1.0
    # printed SmoothL1 with the discontinuous |x| branch, kept for comparison runs
    literal_smooth_l1: bool = False

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown unsupervised loss {self.kind!r}; expected one of {LOSS_KINDS}")
        if self.margin <= 0:
            raise ValueError("margin must be > 0")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")

    @property
    def uses_head(self) -> bool:
        return self.kind in HEAD_KINDS


def binary_ce(p, y) -> Tensor:
    p = ad.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    y = ad.tensor(y)
    return -(y * ad.log(p) + (1.0 - y) * ad.log(1.0 - p))


def supervised_ce(p, y) -> Tensor:
    """Negative binary cross-entropy of predicted probability ``p`` for label ``y``."""
    return binary_ce(p, y)


def edge_ce(w, w_hat) -> Tensor:
    """Cross-entropy between the binary edge indicator and predicted link probability."""
    return binary_ce(w_hat, w)


def learned_distance(g_out) -> Tensor:
    return ad.sqrt(ad.maximum(1.0 - ad.tensor(g_out), DIST_EPS))


def contrastive(w, dist, margin: float = 0.2) -> Tensor:
    w, dist = ad.tensor(w), ad.tensor(dist)
    return w * dist ** 2 + (1.0 - w) * ad.relu(margin - dist) ** 2


def contrastive_from_similarity(w, g_out, margin: float = 0.2) -> Tensor:
    """Contrastive loss on d = sqrt(1 - g), with d^2 taken as 1 - g for connected pairs."""
    w, g_out = ad.tensor(w), ad.tensor(g_out)
    d = learned_distance(g_out)
    return w * (1.0 - g_out) + (1.0 - w) * ad.relu(margin - d) ** 2


def _norm(x: Tensor) -> Tensor:
    return ad.maximum(ad.sqrt(ad.sum(x * x, axis=-1)), NORM_EPS)


def _as_rows(x) -> Tensor:
    x = ad.tensor(x)
    return ad.reshape(x, (1, -1)) if x.data.ndim == 1 else x


def cosine_embed(w, e_u, e_d) -> Tensor:
    """1 - cos for connected pairs, max(0, cos) for unconnected ones."""
    e_u, e_d = _as_rows(e_u), _as_rows(e_d)
    if e_u.shape != e_d.shape:
        raise ValueError("embedding shapes differ")
    w = ad.tensor(w)
    cos = ad.sum(e_u * e_d, axis=-1) / (_norm(e_u) * _norm(e_d))
    return w * (1.0 - cos) + (1.0 - w) * ad.relu(cos)


def embed_norm(w, e_u, e_d, order: int = 1) -> Tensor:
    e_u, e_d = _as_rows(e_u), _as_rows(e_d)
    if e_u.shape != e_d.shape:
        raise ValueError("embedding shapes differ")
    diff = e_u - e_d
    if order == 1:
        dist = ad.sum(ad.abs(diff), axis=-1)
    elif order == 2:
        dist = ad.sum(diff * diff, axis=-1)
    else:
        raise ValueError("order must be 1 or 2")
    return ad.tensor(w) * dist


def regression_loss(w, w_hat, kind: str, literal: bool = False) -> Tensor:
    diff = ad.tensor(w_hat) - ad.tensor(w)
    if kind == "reg_l1":
        return ad.abs(diff)
    if kind == "reg_l2":
        return diff * diff
    if kind == "smooth_l1":
        small = (np.abs(diff.data) < 1.0).astype(np.float64)
        offset = 0.0 if literal else 0.5
        return small * (0.5 * diff * diff) + (1.0 - small) * (ad.abs(diff) - offset)
    raise ValueError(f"unknown regression loss {kind!r}")


def pair_loss(spec: LossSpec, indicator, weights, e_u, e_d, g_out=None) -> Tensor:
    """Per-pair unsupervised loss for any of the eight kinds."""
    kind = spec.kind
    if kind in HEAD_KINDS:
        if g_out is None:
            raise ValueError(f"{kind} needs the similarity head output")
        g_out = ad.reshape(ad.tensor(g_out), (-1,))
    if kind == "contrastive":
        return contrastive_from_similarity(indicator, g_out, spec.margin)
    if kind == "cross_entropy":
        return edge_ce(indicator, g_out)
    if kind in REGRESSION_KINDS:
        return regression_loss(weights, g_out, kind, literal=spec.literal_smooth_l1)
    if kind == "cosine_embed":
        return cosine_embed(indicator, e_u, e_d)
    if kind == "l1_embed":
        return embed_norm(indicator, e_u, e_d, 1)
    return embed_norm(indicator, e_u, e_d, 2)

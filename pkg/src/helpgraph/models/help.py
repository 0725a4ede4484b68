"""Two-tower graph-regularized classifier for user-domain graphs.

A domain tower ``h_d`` and a user tower ``h_u`` embed node features; the
label head ``f`` reads the domain embedding and the similarity head ``g``
reads both embeddings concatenated. Training minimizes the mean labeled
cross-entropy plus ``lam`` times the mean pair loss over sampled pairs.
Prediction uses ``f(h_d(x))`` only, so unseen domains are scored without
touching the graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import losses as L
from ..dataset import LabeledDataset
from ..graph import BipartiteGraph, PairBatch, dichotomize, sample_pairs
from ..losses import LossSpec
from ..nn import DenseBlock, Tensor, TrainSchedule, init_block
from ..nn import autodiff as ad
from .common import TrainLog, fit, role_rng, role_seed

TOWER_DIMS = (96, 64, 32)
HEAD_DIMS = (16, 1)


@dataclass
class HelpModel:
    h_d: DenseBlock
    h_u: DenseBlock
    f: DenseBlock
    g: DenseBlock

    def __post_init__(self):
        if self.h_d.output_dim != self.h_u.output_dim:
            raise ValueError("tower output dims differ")
        if self.g.input_dim != 2 * self.h_d.output_dim:
            raise ValueError("similarity head must read both embeddings")
        if self.f.input_dim != self.h_d.output_dim:
            raise ValueError("label head must read the domain embedding")
        if {id(p) for p in self.h_d.parameters()} & {id(p) for p in self.h_u.parameters()}:
            raise ValueError("towers must not share parameters")

    def blocks(self) -> dict[str, DenseBlock]:
        return {"h_d": self.h_d, "h_u": self.h_u, "f": self.f, "g": self.g}

    def parameters(self) -> list[Tensor]:
        return [p for b in self.blocks().values() for p in b.parameters()]

    def predict(self, domain_features) -> np.ndarray:
        return help_predict(self, domain_features)

    def to_payload(self) -> dict:
        return dict(self.blocks())

    @classmethod
    def from_payload(cls, payload: dict) -> "HelpModel":
        return cls(payload["h_d"], payload["h_u"], payload["f"], payload["g"])


def init_help(domain_dim: int = 29, user_dim: int = 129, seed: int = 0,
              tower_dims=TOWER_DIMS, head_dims=HEAD_DIMS) -> HelpModel:
    emb = tower_dims[-1]
    return HelpModel(
        h_d=init_block(domain_dim, tower_dims, "identity", role_seed(seed, "h_d"), "h_d"),
        h_u=init_block(user_dim, tower_dims, "identity", role_seed(seed, "h_u"), "h_u"),
        f=init_block(emb, head_dims, "sigmoid", role_seed(seed, "f"), "f"),
        g=init_block(2 * emb, head_dims, "sigmoid", role_seed(seed, "g"), "g"),
    )


def help_loss(model: HelpModel, x_labeled, y_labeled, pairs: PairBatch,
              user_features, domain_features, spec: LossSpec) -> Tensor:
    y = np.asarray(y_labeled, dtype=np.float64)
    if len(y) == 0:
        raise ValueError("labeled batch is empty")
    p = ad.reshape(model.f(model.h_d(x_labeled)), (-1,))
    total = ad.mean(L.supervised_ce(p, y))
    if len(pairs) == 0:
        return total
    e_d = model.h_d(np.asarray(domain_features)[pairs.domains])
    e_u = model.h_u(np.asarray(user_features)[pairs.users])
    g_out = model.g(ad.concat([e_d, e_u], axis=1)) if spec.uses_head else None
    unsup = ad.mean(L.pair_loss(spec, pairs.indicator, pairs.weights, e_u, e_d, g_out))
    return total + spec.lam * unsup


def help_train(data: LabeledDataset, graph: BipartiteGraph, spec: LossSpec = LossSpec(),
               sched: TrainSchedule = TrainSchedule(), seed: int = 0,
               threshold: float = 0.0, negative_ratio: float = 1.0,
               model: HelpModel | None = None) -> tuple[HelpModel, TrainLog]:
    if graph.user_count != data.n_users or graph.domain_count != data.n_domains:
        raise ValueError("graph and dataset disagree on node counts")
    if model is None:
        model = init_help(data.domain_features.shape[1], data.user_features.shape[1], seed)
    binary = dichotomize(graph, threshold)
    pair_rng = role_rng(seed, "pairs")
    n_pos = math.ceil(sched.pair_batch_size / (1.0 + negative_ratio))
    x_train = data.domain_features[data.train_idx]
    y_train = data.train_labels
    use_pairs = binary.edge_count > 0

    def batch_loss(idx):
        pairs = (sample_pairs(binary, n_pos, negative_ratio, pair_rng, raw=graph)
                 if use_pairs else PairBatch.empty())
        return help_loss(model, x_train[idx], y_train[idx], pairs,
                         data.user_features, data.domain_features, spec)

    log = fit(model.parameters(), batch_loss, len(y_train), sched, seed)
    return model, log


def help_predict(model: HelpModel, domain_features) -> np.ndarray:
    x = np.asarray(domain_features, dtype=np.float64)
    out = model.f.forward(model.h_d.forward(x))
    return out.reshape(-1) if x.ndim == 2 else out.reshape(())


def embed(model: HelpModel, features, side: str = "domain") -> np.ndarray:
    if side == "domain":
        return model.h_d.forward(features)
    if side == "user":
        return model.h_u.forward(features)
    raise ValueError("side must be 'user' or 'domain'")

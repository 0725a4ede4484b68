"""Feature-only MLP and the two graph-regularized baselines on the domain graph."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import losses as L
from ..dataset import LabeledDataset
from ..graph import DomainGraph, classify_edge_pairs
from ..nn import DenseBlock, Tensor, TrainSchedule, init_block
from ..nn import autodiff as ad
from .common import fit, role_rng, role_seed
from .help import HEAD_DIMS, TOWER_DIMS


def _trunk_and_head(domain_dim: int, seed: int) -> tuple[DenseBlock, DenseBlock]:
    # same roles as HELP's h_d and f so a shared seed gives a shared start
    trunk = init_block(domain_dim, TOWER_DIMS, "identity", role_seed(seed, "h_d"), "h_d")
    head = init_block(TOWER_DIMS[-1], HEAD_DIMS, "sigmoid", role_seed(seed, "f"), "f")
    return trunk, head


@dataclass
class MlpModel:
    trunk: DenseBlock
    head: DenseBlock

    def parameters(self) -> list[Tensor]:
        return self.trunk.parameters() + self.head.parameters()

    def forward(self, x, keep_hidden: bool = False) -> Tensor:
        return self.head(self.trunk(x, keep_hidden), keep_hidden)

    def hidden(self) -> list[Tensor]:
        """Layer outputs of the last ``keep_hidden`` forward pass, trunk then head."""
        return self.trunk.last_hidden + self.head.last_hidden

    def predict(self, domain_features) -> np.ndarray:
        x = np.asarray(domain_features, dtype=np.float64)
        return self.head.forward(self.trunk.forward(x)).reshape(-1)

    def to_payload(self) -> dict:
        return {"trunk": self.trunk, "head": self.head}

    @classmethod
    def from_payload(cls, payload: dict) -> "MlpModel":
        return cls(payload["trunk"], payload["head"])


def init_mlp(domain_dim: int = 29, seed: int = 0) -> MlpModel:
    return MlpModel(*_trunk_and_head(domain_dim, seed))


def mlp_loss(model: MlpModel, x, y) -> Tensor:
    p = ad.reshape(model.forward(x), (-1,))
    return ad.mean(L.supervised_ce(p, np.asarray(y, dtype=np.float64)))


# ---------------------------------------------------------------- Planetoid-I


@dataclass
class PlanetoidModel:
    trunk: DenseBlock
    head: DenseBlock
    context: Tensor
    lam: float = 1.0
    literal_sign: bool = False

    def __post_init__(self):
        if self.context.shape[1] != self.trunk.output_dim:
            raise ValueError("context rows must match the trunk embedding size")

    def parameters(self) -> list[Tensor]:
        return self.trunk.parameters() + self.head.parameters() + [self.context]

    def predict(self, domain_features) -> np.ndarray:
        x = np.asarray(domain_features, dtype=np.float64)
        return self.head.forward(self.trunk.forward(x)).reshape(-1)

    def to_payload(self) -> dict:
        return {"trunk": self.trunk, "head": self.head, "context": self.context.data,
                "lam": self.lam, "literal_sign": self.literal_sign}

    @classmethod
    def from_payload(cls, payload: dict) -> "PlanetoidModel":
        return cls(payload["trunk"], payload["head"], Tensor(payload["context"], requires_grad=True),
                   payload["lam"], payload["literal_sign"])


def init_planetoid(domain_dim: int, domain_count: int, seed: int = 0, lam: float = 1.0,
                   literal_sign: bool = False) -> PlanetoidModel:
    trunk, head = _trunk_and_head(domain_dim, seed)
    emb = trunk.output_dim
    limit = np.sqrt(6.0 / (domain_count + emb))
    ctx = role_rng(seed, "context_init").uniform(-limit, limit, size=(domain_count, emb))
    return PlanetoidModel(trunk, head, Tensor(ctx, requires_grad=True, name="context"), lam,
                          literal_sign)


@dataclass(frozen=True)
class ContextBatch:
    i: np.ndarray
    c: np.ndarray
    gamma: np.ndarray

    def __len__(self) -> int:
        return len(self.i)

    def samples(self) -> list[tuple[int, int, int]]:
        return list(zip(self.i.tolist(), self.c.tolist(), self.gamma.astype(int).tolist()))


@dataclass
class _WalkIndex:
    indptr: np.ndarray
    indices: np.ndarray
    cum: np.ndarray
    row_start: np.ndarray
    row_total: np.ndarray
    active: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @classmethod
    def build(cls, dg: DomainGraph) -> "_WalkIndex":
        adj = dg.adjacency()
        adj.sort_indices()
        cum = np.cumsum(adj.data)
        start = np.r_[0.0, cum][adj.indptr[:-1]]
        total = np.asarray(adj.sum(axis=1)).reshape(-1)
        return cls(adj.indptr, adj.indices, cum, start, total, np.flatnonzero(total > 0))

    def walks(self, n: int, length: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty((n, length), dtype=np.int64)
        out[:, 0] = self.active[rng.integers(0, len(self.active), size=n)]
        for t in range(1, length):
            cur = out[:, t - 1]
            target = self.row_start[cur] + rng.random(n) * self.row_total[cur]
            k = np.searchsorted(self.cum, target, side="right")
            k = np.clip(k, self.indptr[cur], self.indptr[cur + 1] - 1)
            out[:, t] = self.indices[k]
        return out


def planetoid_sample_context(dg: DomainGraph, labels, count: int, walk_length: int = 10,
                             window: int = 3, label_context_prob: float = 0.5,
                             rng: np.random.Generator | int = 0,
                             _index: _WalkIndex | None = None) -> ContextBatch:
    """Draw about ``count`` (i, c, gamma) context samples, half positive, half negative.

    ``labels`` is a per-domain array with -1 for unlabeled domains. Label
    draws pair nodes of the same class (gamma=+1) or different classes
    (gamma=-1); walk draws pair nodes co-occurring within ``window`` steps
    of a weighted random walk (+1) or a walk node with a random node outside
    that window (-1). Self-pairs and draws from empty pools are dropped.
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    labels = np.asarray(labels, dtype=np.float64)
    labeled = np.flatnonzero(labels >= 0)
    n_label = int(rng.binomial(count, label_context_prob)) if len(labeled) else 0
    parts: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []

    if n_label:
        n_pos = (n_label + 1) // 2
        n_neg = n_label - n_pos
        pools = {v: labeled[labels[labeled] == v] for v in (0.0, 1.0)}
        i = labeled[rng.integers(0, len(labeled), size=n_label)]
        same = np.array([len(pools[labels[k]]) for k in i[:n_pos]], dtype=np.int64)
        other = np.array([len(pools[1.0 - labels[k]]) for k in i[n_pos:]], dtype=np.int64)
        u = rng.random(n_label)
        c_pos = np.array([pools[labels[k]][int(r * m)] for k, r, m in zip(i[:n_pos], u[:n_pos], same)],
                         dtype=np.int64)
        keep = c_pos != i[:n_pos]
        parts.append((i[:n_pos][keep], c_pos[keep], np.ones(int(keep.sum()))))
        ok = other > 0
        c_neg = np.array([pools[1.0 - labels[k]][int(r * m)]
                          for k, r, m in zip(i[n_pos:][ok], u[n_pos:][ok], other[ok])], dtype=np.int64)
        parts.append((i[n_pos:][ok], c_neg, -np.ones(len(c_neg))))

    n_walk = count - n_label
    index = _index if _index is not None else _WalkIndex.build(dg)
    if n_walk and len(index.active) and walk_length >= 2:
        n_pos = (n_walk + 1) // 2
        n_neg = n_walk - n_pos
        walks = index.walks(n_walk, walk_length, rng)
        rows = np.arange(n_walk)
        a = rng.integers(0, walk_length, size=n_walk)
        off = rng.integers(1, window + 1, size=n_walk)
        b = np.where(a + off < walk_length, a + off, a - off)
        b = np.clip(b, 0, walk_length - 1)
        i_pos, c_pos = walks[rows[:n_pos], a[:n_pos]], walks[rows[:n_pos], b[:n_pos]]
        keep = i_pos != c_pos
        parts.append((i_pos[keep], c_pos[keep], np.ones(int(keep.sum()))))

        r = rows[n_pos:]
        i_neg = walks[r, a[n_pos:]]
        c_neg = rng.integers(0, dg.domain_count, size=n_neg)
        span = np.arange(-window, window + 1)
        cols = np.clip(a[n_pos:, None] + span[None, :], 0, walk_length - 1)
        in_window = (walks[r[:, None], cols] == c_neg[:, None]).any(axis=1)
        keep = ~in_window & (c_neg != i_neg)
        parts.append((i_neg[keep], c_neg[keep], -np.ones(int(keep.sum()))))

    if not parts:
        z = np.empty(0, dtype=np.int64)
        return ContextBatch(z, z, np.empty(0))
    return ContextBatch(np.concatenate([p[0] for p in parts]).astype(np.int64),
                        np.concatenate([p[1] for p in parts]).astype(np.int64),
                        np.concatenate([p[2] for p in parts]))


def planetoid_loss(model: PlanetoidModel, x_labeled, y_labeled, domain_features,
                   context: ContextBatch) -> Tensor:
    p = ad.reshape(model.head(model.trunk(x_labeled)), (-1,))
    total = ad.mean(L.supervised_ce(p, np.asarray(y_labeled, dtype=np.float64)))
    if len(context) == 0 or model.lam == 0:
        return total
    h = model.trunk(np.asarray(domain_features)[context.i])
    w_c = ad.take_rows(model.context, context.c)
    score = ad.sum(h * w_c, axis=1) * context.gamma
    expectation = ad.mean(ad.log_sigmoid(score))
    if model.literal_sign:
        return total + model.lam * expectation
    return total - model.lam * expectation


# ------------------------------------------------------------------------ NGM


@dataclass
class NgmModel:
    mlp: MlpModel
    lam_ll: float = 1.0
    lam_lu: float = 1.0
    lam_uu: float = 1.0
    distance: str = "l1"
    # index into the trunk+head layer outputs; default is the second-to-last layer
    layer: int = -2

    def __post_init__(self):
        n_layers = len(self.mlp.trunk.layer_dims) + len(self.mlp.head.layer_dims)
        if not -n_layers <= self.layer < n_layers:
            raise ValueError("regularized layer does not exist")
        if self.distance not in ("l1", "l2"):
            raise ValueError("distance must be 'l1' or 'l2'")

    def parameters(self) -> list[Tensor]:
        return self.mlp.parameters()

    def predict(self, domain_features) -> np.ndarray:
        return self.mlp.predict(domain_features)

    def hidden(self, x) -> Tensor:
        self.mlp.forward(x, keep_hidden=True)
        return self.mlp.hidden()[self.layer]

    def to_payload(self) -> dict:
        return {"trunk": self.mlp.trunk, "head": self.mlp.head, "lam_ll": self.lam_ll,
                "lam_lu": self.lam_lu, "lam_uu": self.lam_uu, "distance": self.distance,
                "layer": self.layer}

    @classmethod
    def from_payload(cls, payload: dict) -> "NgmModel":
        return cls(MlpModel(payload["trunk"], payload["head"]), payload["lam_ll"], payload["lam_lu"],
                   payload["lam_uu"], payload["distance"], payload["layer"])


def init_ngm(domain_dim: int = 29, seed: int = 0, lam: float = 1.0, distance: str = "l1",
             layer: int = -2) -> NgmModel:
    return NgmModel(init_mlp(domain_dim, seed), lam, lam, lam, distance, layer)


def _edge_distance(a: Tensor, b: Tensor, kind: str) -> Tensor:
    diff = a - b
    if kind == "l1":
        return ad.sum(ad.abs(diff), axis=1)
    return ad.sum(diff * diff, axis=1)


def ngm_loss(model: NgmModel, x_labeled, y_labeled, domain_features, dg: DomainGraph,
             edge_classes, edge_batch: int | None = None,
             rng: np.random.Generator | None = None) -> Tensor:
    """Supervised CE plus per-class mean of weight * hidden-layer distance over edges.

    A class with more than ``edge_batch`` edges is estimated from a uniform
    sample (with replacement) of that many edges.
    """
    total = mlp_loss(model.mlp, x_labeled, y_labeled)
    feats = np.asarray(domain_features)
    for lam, idx in zip((model.lam_ll, model.lam_lu, model.lam_uu), edge_classes):
        idx = np.asarray(idx, dtype=np.int64)
        if lam == 0 or len(idx) == 0:
            continue
        if edge_batch is not None and len(idx) > edge_batch:
            if rng is None:
                raise ValueError("edge sampling needs an rng")
            idx = idx[rng.integers(0, len(idx), size=edge_batch)]
        h_i = model.hidden(feats[dg.src[idx]])
        h_j = model.hidden(feats[dg.dst[idx]])
        term = ad.mean(_edge_distance(h_i, h_j, model.distance) * dg.weights[idx])
        total = total + lam * term
    return total


# ------------------------------------------------------------------- training


@dataclass
class BaselineHyper:
    lam: float = 1.0
    ngm_distance: str = "l1"
    ngm_layer: int = -2
    walk_length: int = 10
    window: int = 3
    label_context_prob: float = 0.5
    literal_sign: bool = False


def train_baseline(kind: str, data: LabeledDataset, dg: DomainGraph | None = None,
                   sched: TrainSchedule = TrainSchedule(), hyper: BaselineHyper = BaselineHyper(),
                   seed: int = 0):
    """Train an ``mlp``, ``planetoid`` or ``ngm`` model; returns (model, TrainLog)."""
    x_train = data.domain_features[data.train_idx]
    y_train = data.train_labels
    dim = data.domain_features.shape[1]
    if kind != "mlp":
        if dg is None:
            raise ValueError(f"{kind} needs the domain graph")
        if dg.domain_count != data.n_domains:
            raise ValueError("domain graph and dataset disagree on domain count")

    if kind == "mlp":
        model = init_mlp(dim, seed)

        def batch_loss(idx):
            return mlp_loss(model, x_train[idx], y_train[idx])

    elif kind == "planetoid":
        model = init_planetoid(dim, data.n_domains, seed, hyper.lam, hyper.literal_sign)
        ctx_rng = role_rng(seed, "context")
        labels = data.train_label_vector()
        index = _WalkIndex.build(dg)

        def batch_loss(idx):
            ctx = planetoid_sample_context(dg, labels, sched.pair_batch_size, hyper.walk_length,
                                           hyper.window, hyper.label_context_prob, ctx_rng, index)
            return planetoid_loss(model, x_train[idx], y_train[idx], data.domain_features, ctx)

    elif kind == "ngm":
        model = init_ngm(dim, seed, hyper.lam, hyper.ngm_distance, hyper.ngm_layer)
        edge_rng = role_rng(seed, "edges")
        classes = classify_edge_pairs(dg, data.train_label_vector() >= 0)

        def batch_loss(idx):
            return ngm_loss(model, x_train[idx], y_train[idx], data.domain_features, dg, classes,
                            sched.pair_batch_size, edge_rng)

    else:
        raise ValueError(f"unknown baseline {kind!r}")

    log = fit(model.parameters(), batch_loss, len(y_train), sched, seed)
    return model, log

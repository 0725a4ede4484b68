"""Weighted user-domain bipartite graphs and the domain-domain projection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import sparse


@dataclass(frozen=True)
class BipartiteGraph:
    """Immutable user-domain edge store, edges sorted by (user, domain).

    ``users``, ``domains`` and ``weights`` are parallel arrays; zero-weight
    pairs are never stored.
    """

    user_count: int
    domain_count: int
    users: np.ndarray
    domains: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_edges(cls, user_count: int, domain_count: int,
                   edges: Iterable[tuple[int, int, float]]) -> "BipartiteGraph":
        edges = list(edges)
        if edges:
            u, d, w = (np.asarray(col) for col in zip(*edges))
        else:
            u = d = w = np.empty(0)
        return cls.from_arrays(user_count, domain_count, u, d, w)

    @classmethod
    def from_arrays(cls, user_count: int, domain_count: int, users, domains, weights) -> "BipartiteGraph":
        users = np.asarray(users, dtype=np.int64).reshape(-1)
        domains = np.asarray(domains, dtype=np.int64).reshape(-1)
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        if not (len(users) == len(domains) == len(weights)):
            raise ValueError("edge arrays differ in length")
        if user_count < 0 or domain_count < 0:
            raise ValueError("node counts must be nonnegative")
        if len(users):
            if users.min() < 0 or users.max() >= user_count:
                raise ValueError("user index out of range")
            if domains.min() < 0 or domains.max() >= domain_count:
                raise ValueError("domain index out of range")
            if not np.all(np.isfinite(weights)) or weights.min() < 0:
                raise ValueError("edge weights must be finite and >= 0")
        keep = weights > 0
        users, domains, weights = users[keep], domains[keep], weights[keep]
        order = np.lexsort((domains, users))
        users, domains, weights = users[order], domains[order], weights[order]
        if len(users) > 1:
            dup = (np.diff(users) == 0) & (np.diff(domains) == 0)
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise ValueError(f"duplicate edge ({users[k]}, {domains[k]})")
        for a in (users, domains, weights):
            a.setflags(write=False)
        return cls(int(user_count), int(domain_count), users, domains, weights)

    @property
    def edge_count(self) -> int:
        return len(self.weights)

    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.users.tolist(), self.domains.tolist(), self.weights.tolist()))

    def to_sparse(self) -> sparse.csr_matrix:
        return sparse.csr_matrix((self.weights, (self.users, self.domains)),
                                 shape=(self.user_count, self.domain_count))

    def edge_keys(self) -> np.ndarray:
        """Flattened ``user * domain_count + domain`` key per edge (sorted)."""
        return self.users * self.domain_count + self.domains

    def weight_of(self, users, domains) -> np.ndarray:
        """Edge weight for each requested pair, 0 where no edge exists."""
        keys = np.asarray(users, dtype=np.int64) * self.domain_count + np.asarray(domains, dtype=np.int64)
        all_keys = self.edge_keys()
        pos = np.searchsorted(all_keys, keys)
        pos = np.minimum(pos, max(len(all_keys) - 1, 0))
        if len(all_keys) == 0:
            return np.zeros(len(keys))
        hit = all_keys[pos] == keys
        return np.where(hit, self.weights[pos], 0.0)


@dataclass(frozen=True)
class DomainGraph:
    """Undirected weighted domain graph; each edge stored once with i < j."""

    domain_count: int
    src: np.ndarray
    dst: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_edges(cls, domain_count: int, edges: Iterable[tuple[int, int, float]]) -> "DomainGraph":
        acc: dict[tuple[int, int], float] = {}
        for i, j, w in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError("self-loops are not allowed")
            if not (0 <= i < domain_count and 0 <= j < domain_count):
                raise ValueError("domain index out of range")
            key = (min(i, j), max(i, j))
            if key in acc:
                raise ValueError(f"duplicate domain edge {key}")
            if w < 0:
                raise ValueError("edge weights must be >= 0")
            if w > 0:
                acc[key] = float(w)
        keys = sorted(acc)
        src = np.array([k[0] for k in keys], dtype=np.int64)
        dst = np.array([k[1] for k in keys], dtype=np.int64)
        return cls(int(domain_count), src, dst, np.array([acc[k] for k in keys], dtype=np.float64))

    @property
    def edge_count(self) -> int:
        return len(self.weights)

    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.src.tolist(), self.dst.tolist(), self.weights.tolist()))

    def adjacency(self) -> sparse.csr_matrix:
        n = self.domain_count
        a = sparse.coo_matrix((self.weights, (self.src, self.dst)), shape=(n, n))
        return (a + a.T).tocsr()


@dataclass(frozen=True)
class PairBatch:
    users: np.ndarray
    domains: np.ndarray
    indicator: np.ndarray
    # raw interaction weight per pair (0 for negatives); feeds the regression losses
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.users)

    @classmethod
    def empty(cls) -> "PairBatch":
        z = np.empty(0, dtype=np.int64)
        return cls(z, z, np.empty(0), np.empty(0))

    def pairs(self) -> list[tuple[int, int, int]]:
        return list(zip(self.users.tolist(), self.domains.tolist(), self.indicator.astype(int).tolist()))


def dichotomize(g: BipartiteGraph, threshold: float = 0.0) -> BipartiteGraph:
    """Keep edges with weight strictly above ``threshold``, as weight 1."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    keep = g.weights > threshold
    return BipartiteGraph.from_arrays(g.user_count, g.domain_count, g.users[keep], g.domains[keep],
                                      np.ones(int(keep.sum())))


def compress_to_domain_graph(g: BipartiteGraph) -> DomainGraph:
    """Project onto domains: e(i, j) = sum over shared users of min(w_ui, w_uj)."""
    if g.edge_count == 0:
        empty = np.empty(0, dtype=np.int64)
        return DomainGraph(g.domain_count, empty, empty, np.empty(0))
    # edges are sorted by user, so each user's domains form one contiguous run
    starts = np.flatnonzero(np.r_[True, np.diff(g.users) != 0])
    ends = np.r_[starts[1:], g.edge_count]
    src, dst, wts = [], [], []
    for s, e in zip(starts, ends):
        if e - s < 2:
            continue
        d = g.domains[s:e]
        w = g.weights[s:e]
        a, b = np.triu_indices(e - s, k=1)
        src.append(d[a])
        dst.append(d[b])
        wts.append(np.minimum(w[a], w[b]))
    if not src:
        empty = np.empty(0, dtype=np.int64)
        return DomainGraph(g.domain_count, empty, empty, np.empty(0))
    n = g.domain_count
    m = sparse.coo_matrix((np.concatenate(wts), (np.concatenate(src), np.concatenate(dst))),
                          shape=(n, n)).tocsr()
    m.sum_duplicates()
    m.eliminate_zeros()
    coo = m.tocoo()
    order = np.lexsort((coo.col, coo.row))
    return DomainGraph(n, coo.row[order].astype(np.int64), coo.col[order].astype(np.int64),
                       coo.data[order].astype(np.float64))


def sample_pairs(g: BipartiteGraph, positives_per_epoch: int, negative_ratio: float = 1.0,
                 rng_seed: int | np.random.Generator = 0,
                 raw: BipartiteGraph | None = None) -> PairBatch:
    """Uniform positive pairs (without replacement) plus rejection-sampled non-edges.

    ``g`` is the dichotomized graph defining the indicator. ``raw`` optionally
    supplies interaction weights for the regression losses; it defaults to ``g``.
    """
    if g.user_count == 0 or g.domain_count == 0:
        raise ValueError("graph has no users or no domains")
    if negative_ratio <= 0:
        raise ValueError("negative_ratio must be positive")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    n_pos = min(int(positives_per_epoch), g.edge_count)
    n_neg = math.ceil(negative_ratio * n_pos)
    total = g.user_count * g.domain_count
    if n_neg > 0 and g.edge_count >= total:
        raise ValueError("graph has no non-edges to sample negatives from")
    pick = rng.choice(g.edge_count, size=n_pos, replace=False) if n_pos else np.empty(0, dtype=np.int64)
    pu, pd = g.users[pick], g.domains[pick]

    keys = g.edge_keys()
    neg = np.empty(0, dtype=np.int64)
    while len(neg) < n_neg:
        need = n_neg - len(neg)
        cand = rng.integers(0, total, size=max(2 * need, 16))
        pos = np.searchsorted(keys, cand)
        pos = np.minimum(pos, max(len(keys) - 1, 0))
        is_edge = (keys[pos] == cand) if len(keys) else np.zeros(len(cand), dtype=bool)
        neg = np.concatenate([neg, cand[~is_edge][:need]])
    nu, nd = neg // g.domain_count, neg % g.domain_count

    users = np.concatenate([pu, nu]).astype(np.int64)
    domains = np.concatenate([pd, nd]).astype(np.int64)
    indicator = np.concatenate([np.ones(n_pos), np.zeros(n_neg)])
    source = raw if raw is not None else g
    weights = source.weight_of(users, domains)
    weights[n_pos:] = 0.0
    return PairBatch(users, domains, indicator, weights)


def classify_edge_pairs(dg: DomainGraph, labeled_mask) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split edge indices into labeled-labeled, labeled-unlabeled, unlabeled-unlabeled."""
    mask = np.asarray(labeled_mask, dtype=bool)
    if mask.shape != (dg.domain_count,):
        raise ValueError("labeled_mask length must equal domain_count")
    n_lab = mask[dg.src].astype(int) + mask[dg.dst].astype(int)
    idx = np.arange(dg.edge_count)
    return idx[n_lab == 2], idx[n_lab == 1], idx[n_lab == 0]

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from ..graph import DomainGraph


@dataclass(frozen=True)
class LabelPropConfig:
    max_iterations: int = 1000
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.max_iterations < 1 or self.tolerance <= 0:
            raise ValueError("max_iterations and tolerance must be positive")


@dataclass(frozen=True)
class LabelPropResult:
    scores: np.ndarray
    # nodes in components without any label; they carry the labeled prevalence
    fallback: np.ndarray
    iterations: int
    converged: bool


def label_propagation(dg: DomainGraph, labels, cfg: LabelPropConfig = LabelPropConfig()) -> LabelPropResult:
    """Iterate F <- D^-1 W F with labeled rows clamped after every step.

    ``labels`` is a per-domain array holding 0/1 for labeled domains and -1
    (or NaN) for unlabeled ones.
    """
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != (dg.domain_count,):
        raise ValueError("labels must have one entry per domain")
    known = np.isfinite(y) & (y >= 0)
    if not known.any():
        raise ValueError("at least one labeled domain is required")
    prevalence = float(y[known].mean())

    w = dg.adjacency()
    deg = np.asarray(w.sum(axis=1)).reshape(-1)
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    p = sparse.diags(inv) @ w

    _, comp = csgraph.connected_components(w, directed=False)
    has_label = np.zeros(comp.max() + 1, dtype=bool)
    has_label[comp[known]] = True
    fallback = ~has_label[comp]

    f = np.where(known, y, prevalence)
    # isolated nodes keep their value: their row of P is empty
    isolated = deg == 0
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        nxt = p @ f
        nxt[isolated] = f[isolated]
        nxt[known] = y[known]
        change = float(np.max(np.abs(nxt - f))) if len(f) else 0.0
        f = nxt
        if change < cfg.tolerance:
            converged = True
            break
    f[fallback] = prevalence
    return LabelPropResult(f, fallback, it, converged)

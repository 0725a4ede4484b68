"""User vulnerability labels and the 2-D separation score for embeddings.

A user is *active* in a window when their total interaction count exceeds
``active_threshold``, and *vulnerable* when their interactions with
positively labeled domains exceed ``vulnerable_threshold``. Active users
that are not vulnerable are the negatives. The score projects a balanced
sample to two dimensions with PCA and reports the AUROC of a
nearest-centroid rule there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import BipartiteGraph
from .pca import centroid_separation, pca_project


@dataclass(frozen=True)
class StudyResult:
    coords: np.ndarray
    labels: np.ndarray
    rows: np.ndarray  # row indices into the embedding matrix
    score: float


def vulnerable_users(window: BipartiteGraph, domain_labels, active_threshold: float = 5,
                     vulnerable_threshold: float = 5) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(active user indices, 0/1 vulnerability labels)`` for one window."""
    domain_labels = np.asarray(domain_labels)
    if domain_labels.shape != (window.domain_count,):
        raise ValueError("need one label per domain")
    positive = domain_labels.astype(bool)
    total = np.bincount(window.users, weights=window.weights, minlength=window.user_count)
    hits = np.bincount(window.users, weights=window.weights * positive[window.domains],
                       minlength=window.user_count)
    active = np.flatnonzero(total > active_threshold)
    return active, (hits[active] > vulnerable_threshold).astype(np.int64)


def downsample_negatives(labels, rng: np.random.Generator | int = 0) -> np.ndarray:
    """Indices keeping every positive and an equal-size random subset of negatives."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    y = np.asarray(labels).astype(bool)
    pos = np.flatnonzero(y)
    neg = np.flatnonzero(~y)
    if len(pos) == 0:
        raise ValueError("no positive users; cannot run the separation study")
    if len(neg) > len(pos):
        neg = np.sort(rng.choice(neg, size=len(pos), replace=False))
    return np.sort(np.concatenate([pos, neg]))


def separation_study(embeddings, labels, seed: int = 0) -> StudyResult:
    """Balance classes, project with PCA and score the 2-D class separation."""
    x = np.asarray(embeddings, dtype=np.float64)
    y = np.asarray(labels).astype(np.int64)
    if x.shape[0] != y.shape[0]:
        raise ValueError("embeddings and labels differ in length")
    keep = downsample_negatives(y, np.random.default_rng(np.random.SeedSequence([int(seed), 31])))
    if y[keep].min() == 1:
        raise ValueError("no negative users; cannot run the separation study")
    coords = pca_project(x[keep], 2)
    return StudyResult(coords, y[keep], keep, centroid_separation(coords, y[keep]))

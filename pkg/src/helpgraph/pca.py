from __future__ import annotations

import numpy as np


def pca_project(x, out_dim: int = 2) -> np.ndarray:
    """Project centered rows onto the top ``out_dim`` principal directions.

    Components come in descending eigenvalue order; each is signed so its
    largest-magnitude loading is positive.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise ValueError("need at least 2 rows and 2 columns")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    vals, vecs = np.linalg.eigh(cov)
    if vals.max() <= 1e-12 * max(1.0, float(np.abs(x).max()) ** 2):
        raise ValueError("input has rank 0 after centering")
    order = np.argsort(vals, kind="mergesort")[::-1][:out_dim]
    comps = vecs[:, order]
    pivot = np.argmax(np.abs(comps), axis=0)
    signs = np.sign(comps[pivot, np.arange(comps.shape[1])])
    signs[signs == 0] = 1.0
    return centered @ (comps * signs)


def centroid_separation(coords, labels) -> float:
    """AUROC of the nearest-centroid score dist(neg centroid) - dist(pos centroid)."""
    from .metrics import auroc

    coords = np.asarray(coords, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if y.all() or not y.any():
        raise ValueError("separation needs both classes")
    pos_c = coords[y].mean(axis=0)
    neg_c = coords[~y].mean(axis=0)
    score = np.linalg.norm(coords - neg_c, axis=1) - np.linalg.norm(coords - pos_c, axis=1)
    return auroc(score, y.astype(int))

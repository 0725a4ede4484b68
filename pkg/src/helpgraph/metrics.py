"""AUROC and AUPRC for imbalanced binary labels."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata


class UndefinedMetricError(ValueError):
    pass


def _check(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    if not np.all(np.isin(y, (0, 1))):
        raise ValueError("labels must be 0 or 1")
    return s, y.astype(bool)


def auroc(scores, labels) -> float:
    """Mann-Whitney AUC via tie-averaged rank sums (tied pairs count 1/2)."""
    s, y = _check(scores, labels)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUROC needs at least one positive and one negative")
    ranks = rankdata(s, method="average")
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def precision_recall_points(scores, labels) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(thresholds, precision, recall) at each distinct score, descending."""
    s, y = _check(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise UndefinedMetricError("AUPRC needs at least one positive")
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    last_of_group = np.r_[s[1:] != s[:-1], True]
    tp = np.cumsum(y)[last_of_group]
    seen = np.flatnonzero(last_of_group) + 1
    return s[last_of_group], tp / seen, tp / n_pos


def auprc(scores, labels) -> float:
    """Average precision: sum over thresholds of (R_k - R_{k-1}) * P_k."""
    _, precision, recall = precision_recall_points(scores, labels)
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


@dataclass
class EvalReport:
    auroc_mean: float
    auroc_sd: float
    auprc_mean: float
    auprc_sd: float
    runs: int
    prevalence: float
    per_run: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls(**json.loads(text))


def _sd(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    m = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - m) ** 2 for v in values) / (len(values) - 1))


def _run_key(r: dict):
    return (r.get("run", -1), json.dumps(r, sort_keys=True))


def aggregate(reports: list[dict], prevalence: float = float("nan")) -> EvalReport:
    """Mean and sample standard deviation over per-run ``{"auroc", "auprc"}`` dicts."""
    if not reports:
        raise ValueError("no runs to aggregate")
    ar = sorted(float(r["auroc"]) for r in reports)
    ap = sorted(float(r["auprc"]) for r in reports)
    return EvalReport(
        auroc_mean=math.fsum(ar) / len(ar),
        auroc_sd=_sd(ar),
        auprc_mean=math.fsum(ap) / len(ap),
        auprc_sd=_sd(ap),
        runs=len(reports),
        prevalence=float(prevalence),
        per_run=sorted((dict(r) for r in reports), key=_run_key),
    )

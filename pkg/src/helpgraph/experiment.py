"""Repeated training and evaluation of one model kind on one dataset.

Each repetition ``i`` trains from seed ``base_seed + i`` with its own model
and random streams, so repetitions may run on worker threads without
sharing state. Results are gathered only after every worker finishes and are
ordered by repetition index, which keeps reports independent of scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import LabeledDataset
from .graph import BipartiteGraph, DomainGraph, compress_to_domain_graph
from .losses import LossSpec
from .metrics import EvalReport, aggregate, auprc, auroc
from .models import (BaselineHyper, LabelPropConfig, MODEL_KINDS, TrainLog, help_train,
                     label_propagation, train_baseline)
from .nn import TrainSchedule


@dataclass(frozen=True)
class TrainSettings:
    kind: str = "help"
    loss: LossSpec = LossSpec()
    schedule: TrainSchedule = field(default_factory=TrainSchedule)
    baseline: BaselineHyper = field(default_factory=BaselineHyper)
    labelprop: LabelPropConfig = LabelPropConfig()
    threshold: float = 0.0
    negative_ratio: float = 1.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {', '.join(MODEL_KINDS)}")


@dataclass
class RunResult:
    run: int
    seed: int
    auroc: float
    auprc: float
    model: object | None
    log: TrainLog | None
    scores: np.ndarray


def evaluate_scores(scores, data: LabeledDataset) -> dict:
    s = np.asarray(scores)[data.test_idx]
    y = data.test_labels.astype(int)
    return {"auroc": auroc(s, y), "auprc": auprc(s, y)}


def train_once(settings: TrainSettings, graph: BipartiteGraph, data: LabeledDataset, seed: int,
               domain_graph: DomainGraph | None = None):
    """Train one model; returns ``(model or None, log or None, scores for every domain)``."""
    kind = settings.kind
    if kind == "help":
        model, log = help_train(data, graph, settings.loss, settings.schedule, seed,
                                settings.threshold, settings.negative_ratio)
        return model, log, model.predict(data.domain_features)
    dg = domain_graph if domain_graph is not None else (
        compress_to_domain_graph(graph) if kind != "mlp" else None)
    if kind == "lp":
        result = label_propagation(dg, data.train_label_vector(), settings.labelprop)
        return None, None, result.scores
    model, log = train_baseline(kind, data, dg, settings.schedule, settings.baseline, seed)
    return model, log, model.predict(data.domain_features)


def run_repetitions(settings: TrainSettings, graph: BipartiteGraph, data: LabeledDataset,
                    base_seed: int = 0, repetitions: int | None = None,
                    workers: int = 1) -> tuple[EvalReport, list[RunResult]]:
    reps = settings.schedule.repetitions if repetitions is None else int(repetitions)
    if reps < 1:
        raise ValueError("repetitions must be >= 1")
    if graph.user_count != data.n_users or graph.domain_count != data.n_domains:
        raise ValueError("graph and dataset disagree on node counts")
    dg = compress_to_domain_graph(graph) if settings.kind in ("planetoid", "ngm", "lp") else None
    # Label propagation has no parameters or randomness, so one run suffices.
    if settings.kind == "lp":
        reps = 1

    def one(i: int) -> RunResult:
        seed = int(base_seed) + i
        model, log, scores = train_once(settings, graph, data, seed, dg)
        m = evaluate_scores(scores, data)
        return RunResult(i, seed, m["auroc"], m["auprc"], model, log, scores)

    if workers > 1 and reps > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(reps)))
    else:
        results = [one(i) for i in range(reps)]
    results.sort(key=lambda r: r.run)
    prevalence = float(data.test_labels.mean()) if len(data.test_labels) else float("nan")
    report = aggregate([{"run": r.run, "seed": r.seed, "auroc": r.auroc, "auprc": r.auprc}
                        for r in results], prevalence)
    return report, results


def best_run(results: list[RunResult]) -> RunResult:
    """Highest test AUPRC; ties go to the earliest repetition."""
    return max(results, key=lambda r: (r.auprc, -r.run))

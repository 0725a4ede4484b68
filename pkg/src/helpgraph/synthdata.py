"""Planted-structure user-domain data.

Domains draw a class and a class-conditional latent vector; users draw an
affinity vector from a two-component mixture aligned with the two class
means. Interaction counts are Poisson with a per-user softmax over
``affinity_sharpness * cos(z_u, z_d)``, and features are noisy random linear
projections of the latents. Labels therefore drive both features and edges,
which is what gives graph regularization something to find. Users also carry
a few nuisance traits that feed their features but never their edges, so raw
user features mix class-related and unrelated variation.

The generated data aims only at qualitative behaviour; it makes no claim to
match any real feature distribution.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .dataset import LabeledDataset
from .graph import BipartiteGraph, compress_to_domain_graph
from .metrics import auroc
from .models.labelprop import LabelPropConfig, label_propagation

__all__ = ["LabeledDataset", "SynthConfig", "SyntheticTruth", "generate", "generate_with_truth",
           "graph_signal_check", "heldout_window", "resample_edges"]

_USER_CHUNK = 500


@dataclass(frozen=True)
class SynthConfig:
    n_users: int = 5000
    n_domains: int = 2000
    n_labeled: int = 200
    domain_feature_dim: int = 29
    user_feature_dim: int = 129
    n_classes: int = 2
    class_prevalence: float = 0.2
    latent_dim: int = 8
    feature_noise_sd: float = 1.0
    edge_rate: float = 3.0
    affinity_sharpness: float = 4.0
    train_fraction: float = 0.7
    latent_sd: float = 0.5
    user_latent_sd: float = 1.0
    projection_scale: float = 0.4
    user_projection_scale: float = 0.4
    user_nuisance_dim: int = 4
    user_nuisance_sd: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.n_classes != 2:
            raise ValueError("only binary labels are supported")
        if not 0 < self.class_prevalence < 1:
            raise ValueError("class_prevalence must lie strictly between 0 and 1")
        if self.n_users < 1 or self.n_domains < 1 or self.latent_dim < 1:
            raise ValueError("node counts and latent_dim must be >= 1")
        if not 0 <= self.n_labeled <= self.n_domains:
            raise ValueError("n_labeled must lie in [0, n_domains]")
        if self.feature_noise_sd < 0 or self.edge_rate < 0 or self.affinity_sharpness < 0:
            raise ValueError("noise, edge rate and sharpness must be >= 0")
        if min(self.latent_sd, self.user_latent_sd, self.projection_scale, self.user_projection_scale,
               self.user_nuisance_sd) < 0 or self.user_nuisance_dim < 0:
            raise ValueError("spreads, gains and nuisance sizes must be >= 0")
        if self.domain_feature_dim < 1 or self.user_feature_dim < 1:
            raise ValueError("feature dims must be >= 1")
        if not 0 < self.train_fraction <= 1:
            raise ValueError("train_fraction must lie in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        names = {f.name: f.type for f in fields(cls)}
        out = {}
        for k, v in d.items():
            if k in names:
                out[k] = v
        return cls(**out)


@dataclass(frozen=True)
class SyntheticTruth:
    domain_classes: np.ndarray
    user_components: np.ndarray
    domain_latents: np.ndarray
    user_latents: np.ndarray


def _streams(seed: int) -> dict[str, np.random.Generator]:
    names = ("classes", "latents", "users", "edges", "features", "labels", "nuisance")
    children = np.random.SeedSequence(int(seed)).spawn(len(names))
    return {n: np.random.default_rng(c) for n, c in zip(names, children)}


def resample_edges(cfg: SynthConfig, truth: SyntheticTruth, rng: np.random.Generator) -> BipartiteGraph:
    """Draw Poisson interaction counts for every (user, domain) pair from the latents."""
    zd = truth.domain_latents / np.maximum(np.linalg.norm(truth.domain_latents, axis=1, keepdims=True), 1e-12)
    zu = truth.user_latents / np.maximum(np.linalg.norm(truth.user_latents, axis=1, keepdims=True), 1e-12)
    us, ds, ws = [], [], []
    for start in range(0, cfg.n_users, _USER_CHUNK):
        block = zu[start:start + _USER_CHUNK]
        logits = cfg.affinity_sharpness * (block @ zd.T)
        logits -= logits.max(axis=1, keepdims=True)
        aff = np.exp(logits)
        aff /= aff.sum(axis=1, keepdims=True)
        counts = rng.poisson(cfg.edge_rate * aff)
        u, d = np.nonzero(counts)
        us.append(u + start)
        ds.append(d)
        ws.append(counts[u, d].astype(np.float64))
    return BipartiteGraph.from_arrays(cfg.n_users, cfg.n_domains, np.concatenate(us), np.concatenate(ds),
                                      np.concatenate(ws))


def generate_with_truth(cfg: SynthConfig = SynthConfig()) -> tuple[BipartiteGraph, LabeledDataset, SyntheticTruth]:
    rng = _streams(cfg.seed)
    k = cfg.latent_dim
    mean_pos = np.zeros(k)
    mean_pos[0] = 1.0
    means = np.stack([-mean_pos, mean_pos])  # two units apart

    y = (rng["classes"].random(cfg.n_domains) < cfg.class_prevalence).astype(np.int64)
    z_d = means[y] + cfg.latent_sd * rng["latents"].standard_normal((cfg.n_domains, k))
    comp = (rng["users"].random(cfg.n_users) < cfg.class_prevalence).astype(np.int64)
    z_u = means[comp] + cfg.user_latent_sd * rng["users"].standard_normal((cfg.n_users, k))
    truth = SyntheticTruth(y, comp, z_d, z_u)

    graph = resample_edges(cfg, truth, rng["edges"])

    fr = rng["features"]
    scale = cfg.projection_scale / np.sqrt(k)
    proj_d = scale * fr.standard_normal((k, cfg.domain_feature_dim))
    user_gain = cfg.user_projection_scale
    proj_u = (user_gain / np.sqrt(k)) * fr.standard_normal((k, cfg.user_feature_dim))
    x_d = z_d @ proj_d + cfg.feature_noise_sd * fr.standard_normal((cfg.n_domains, cfg.domain_feature_dim))
    x_u = z_u @ proj_u + cfg.feature_noise_sd * fr.standard_normal((cfg.n_users, cfg.user_feature_dim))
    if cfg.user_nuisance_dim:
        # user traits that shape features but never edges or labels
        nr = rng["nuisance"]
        traits = cfg.user_nuisance_sd * nr.standard_normal((cfg.n_users, cfg.user_nuisance_dim))
        x_u = x_u + traits @ ((user_gain / np.sqrt(k)) * nr.standard_normal((cfg.user_nuisance_dim, cfg.user_feature_dim)))

    lr = rng["labels"]
    labeled = np.sort(lr.choice(cfg.n_domains, size=cfg.n_labeled, replace=False))
    n_train = int(round(cfg.train_fraction * cfg.n_labeled))
    train_mask = np.zeros(cfg.n_labeled, dtype=bool)
    train_mask[lr.permutation(cfg.n_labeled)[:n_train]] = True
    ds = LabeledDataset(x_d, x_u, labeled, y[labeled].astype(np.float64), train_mask, ~train_mask)
    return graph, ds, truth


def generate(cfg: SynthConfig = SynthConfig()) -> tuple[BipartiteGraph, LabeledDataset]:
    graph, ds, _ = generate_with_truth(cfg)
    return graph, ds


def heldout_window(cfg: SynthConfig, truth: SyntheticTruth, window_seed: int = 1,
                   edge_rate: float | None = None) -> BipartiteGraph:
    """A later interaction window: same latents, fresh edge draws.

    ``edge_rate`` overrides the per-user rate, modelling a longer or busier
    observation window than the training one.
    """
    if edge_rate is not None:
        cfg = replace(cfg, edge_rate=float(edge_rate))
    rng = np.random.default_rng(np.random.SeedSequence([int(cfg.seed), 1000 + int(window_seed)]))
    return resample_edges(cfg, truth, rng)


def graph_signal_check(g: BipartiteGraph, ds: LabeledDataset,
                       cfg: LabelPropConfig = LabelPropConfig()) -> float:
    """Test-split AUROC of label propagation on the compressed domain graph."""
    result = label_propagation(compress_to_domain_graph(g), ds.train_label_vector(), cfg)
    return auroc(result.scores[ds.test_idx], ds.test_labels.astype(int))

"""Flat ``key = value`` run configuration.

Blank lines are ignored and ``#`` starts a comment, either on its own
line or after a value, so ``helpgraph --help`` output can be pasted back
as a config file. Every key has a
default, so an empty file (or no file at all) is a complete configuration.
Unknown keys are rejected so typos surface before any work starts.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..experiment import TrainSettings
from ..losses import LOSS_KINDS, LossSpec
from ..models import BaselineHyper, LabelPropConfig
from ..nn import TrainSchedule
from ..synthdata import SynthConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Key:
    default: object
    doc: str


_SYNTH, _SCHED = SynthConfig(), TrainSchedule()
_LOSS, _BASE, _LP = LossSpec(), BaselineHyper(), LabelPropConfig()

KEYS: dict[str, Key] = {
    # generation
    "n_users": Key(_SYNTH.n_users, "number of users"),
    "n_domains": Key(_SYNTH.n_domains, "number of domains"),
    "n_labeled": Key(_SYNTH.n_labeled, "domains with visible labels"),
    "domain_feature_dim": Key(_SYNTH.domain_feature_dim, "domain feature width"),
    "user_feature_dim": Key(_SYNTH.user_feature_dim, "user feature width"),
    "class_prevalence": Key(_SYNTH.class_prevalence, "probability a domain is positive"),
    "latent_dim": Key(_SYNTH.latent_dim, "latent space dimension"),
    "latent_sd": Key(_SYNTH.latent_sd, "spread of domain latents around their class mean"),
    "user_latent_sd": Key(_SYNTH.user_latent_sd, "spread of user latents around their component mean"),
    "projection_scale": Key(_SYNTH.projection_scale, "gain of the latent-to-domain-feature projection"),
    "user_projection_scale": Key(_SYNTH.user_projection_scale, "gain of the latent-to-user-feature projection"),
    "user_nuisance_dim": Key(_SYNTH.user_nuisance_dim, "user traits that shape features but not edges"),
    "user_nuisance_sd": Key(_SYNTH.user_nuisance_sd, "spread of the user nuisance traits"),
    "feature_noise_sd": Key(_SYNTH.feature_noise_sd, "feature noise standard deviation"),
    "edge_rate": Key(_SYNTH.edge_rate, "expected interactions per user"),
    "affinity_sharpness": Key(_SYNTH.affinity_sharpness, "softmax sharpness of user-domain affinity"),
    "train_fraction": Key(_SYNTH.train_fraction, "share of labeled domains in the train split"),
    "heldout_window": Key(False, "also write a held-out interaction window and true domain classes"),
    "heldout_edge_rate": Key(6.0, "per-user interaction rate of the held-out window"),
    # training
    "model": Key("help", "help, mlp, planetoid, ngm or lp"),
    "unsupervised_loss": Key(_LOSS.kind, "pair loss kind: " + ", ".join(LOSS_KINDS)),
    "margin": Key(_LOSS.margin, "contrastive margin"),
    "lambda": Key(_LOSS.lam, "weight of the unsupervised term"),
    "literal_smooth_l1": Key(_LOSS.literal_smooth_l1, "use |x| rather than |x| - 0.5 in smooth L1"),
    "threshold": Key(0.0, "edges with weight above this become positive pairs"),
    "negative_ratio": Key(1.0, "sampled negative pairs per positive pair"),
    "initial_lr": Key(_SCHED.initial_lr, "Adam learning rate at epoch 0"),
    "decay_ratio": Key(_SCHED.decay_ratio, "learning-rate multiplier per decay"),
    "decay_every": Key(_SCHED.decay_every, "epochs between decays"),
    "weight_decay": Key(_SCHED.weight_decay, "L2 coefficient added to gradients"),
    "epochs": Key(_SCHED.epochs, "training epochs"),
    "steps_per_epoch": Key(_SCHED.steps_per_epoch, "minimum optimizer steps per epoch"),
    "batch_size": Key(_SCHED.batch_size, "labeled examples per step"),
    "pair_batch_size": Key(_SCHED.pair_batch_size, "pairs (or contexts, or edges) per step"),
    "repetitions": Key(_SCHED.repetitions, "independent trainings, seeds base+i"),
    "workers": Key(1, "threads used for repetitions"),
    "ngm_distance": Key(_BASE.ngm_distance, "l1 or l2"),
    "ngm_layer": Key(_BASE.ngm_layer, "hidden layer regularized by the neural graph machine"),
    "walk_length": Key(_BASE.walk_length, "random-walk length for context sampling"),
    "window": Key(_BASE.window, "context window along a walk"),
    "label_context_prob": Key(_BASE.label_context_prob, "share of label-based contexts"),
    "literal_sign": Key(_BASE.literal_sign, "keep the context term as +lambda E log sigmoid (rewards dissimilar contexts)"),
    "lp_max_iterations": Key(_LP.max_iterations, "label propagation iteration cap"),
    "lp_tolerance": Key(_LP.tolerance, "label propagation convergence tolerance"),
    # separation study
    "active_threshold": Key(5.0, "users with more interactions than this are active"),
    "vulnerable_threshold": Key(5.0, "active users with more positive-domain interactions are vulnerable"),
    # shared
    "seed": Key(0, "base random seed"),
}


def _coerce(key: str, text: str, default):
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {type(default).__name__}") from None
    return text


def parse_config(text: str, source: str = "<config>") -> dict:
    values = {k: v.default for k, v in KEYS.items()}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value, KEYS[key].default)
    return values


def load_config(path: str | None, seed: int | None = None) -> dict:
    text = "" if path is None else Path(path).read_text(encoding="utf-8")
    values = parse_config(text, str(path) if path else "<defaults>")
    if seed is not None:
        values["seed"] = int(seed)
    return values


def synth_config(values: dict) -> SynthConfig:
    names = SynthConfig.__dataclass_fields__
    try:
        return SynthConfig(**{k: values[k] for k in names if k in values})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def train_settings(values: dict) -> TrainSettings:
    try:
        return TrainSettings(
            kind=values["model"],
            loss=LossSpec(values["unsupervised_loss"], values["margin"], values["lambda"],
                          values["literal_smooth_l1"]),
            schedule=TrainSchedule(values["initial_lr"], values["decay_ratio"], values["decay_every"],
                                   values["weight_decay"], values["epochs"], values["repetitions"],
                                   values["batch_size"], values["pair_batch_size"],
                                   values["steps_per_epoch"]),
            baseline=BaselineHyper(values["lambda"], values["ngm_distance"], values["ngm_layer"],
                                   values["walk_length"], values["window"],
                                   values["label_context_prob"], values["literal_sign"]),
            labelprop=LabelPropConfig(values["lp_max_iterations"], values["lp_tolerance"]),
            threshold=values["threshold"],
            negative_ratio=values["negative_ratio"],
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def describe_keys() -> str:
    return "\n".join(f"{k} = {str(v.default):<10}  # {v.doc}" for k, v in KEYS.items())

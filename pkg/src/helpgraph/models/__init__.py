from .baselines import (
    BaselineHyper,
    ContextBatch,
    MlpModel,
    NgmModel,
    PlanetoidModel,
    init_mlp,
    init_ngm,
    init_planetoid,
    mlp_loss,
    ngm_loss,
    planetoid_loss,
    planetoid_sample_context,
    train_baseline,
)
from .common import TrainLog, role_seed
from .help import HelpModel, embed, help_loss, help_predict, help_train, init_help
from .labelprop import LabelPropConfig, LabelPropResult, label_propagation

MODEL_KINDS = ("help", "mlp", "planetoid", "ngm", "lp")

__all__ = [
    "BaselineHyper",
    "ContextBatch",
    "HelpModel",
    "LabelPropConfig",
    "LabelPropResult",
    "MODEL_KINDS",
    "MlpModel",
    "NgmModel",
    "PlanetoidModel",
    "TrainLog",
    "embed",
    "help_loss",
    "help_predict",
    "help_train",
    "init_help",
    "init_mlp",
    "init_ngm",
    "init_planetoid",
    "label_propagation",
    "mlp_loss",
    "ngm_loss",
    "planetoid_loss",
    "planetoid_sample_context",
    "role_seed",
    "train_baseline",
]

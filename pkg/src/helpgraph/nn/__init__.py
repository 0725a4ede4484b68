from .autodiff import NumericError, Tensor, gradient, value_and_gradient
from .block import DenseBlock, init_block
from .optim import AdamState, TrainSchedule, adam_step, lr_at_epoch

__all__ = [
    "AdamState",
    "DenseBlock",
    "NumericError",
    "Tensor",
    "TrainSchedule",
    "adam_step",
    "gradient",
    "init_block",
    "lr_at_epoch",
    "value_and_gradient",
]

"""Training core for per-synapse dynamic learning rate experiments."""

from ._core import (
    Mlp,
    __version__,
    accuracy,
    backward,
    dlr_rates,
    dlr_step,
    fit_schedule,
    forward,
    load_idx_images,
    load_idx_labels,
    logistic,
    mse_loss,
    neuron_norms,
    one_hot,
    scheduled_rate,
    sgd_step,
    train_to_threshold,
)

__all__ = [
    "Mlp",
    "__version__",
    "accuracy",
    "backward",
    "dlr_rates",
    "dlr_step",
    "fit_schedule",
    "forward",
    "load_idx_images",
    "load_idx_labels",
    "logistic",
    "mse_loss",
    "neuron_norms",
    "one_hot",
    "scheduled_rate",
    "sgd_step",
    "train_to_threshold",
]

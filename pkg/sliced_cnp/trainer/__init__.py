"""Training loop, Adam optimizer, schedules and run configuration."""

from .config import OPTIMIZERS, SCHEDULES, TrainConfig
from .loop import (compute_objective, run_comparison, run_experiment,
                   sample_context, train_step)
from .optim import OptimizerState, adam_step, lr_at

__all__ = ["TrainConfig", "SCHEDULES", "OPTIMIZERS", "OptimizerState",
           "adam_step", "lr_at", "sample_context", "compute_objective",
           "train_step", "run_experiment", "run_comparison"]

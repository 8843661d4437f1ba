"""Conditional neural processes trained with sliced Wasserstein distances.

Everything runs on a small reverse-mode differentiation core over numpy
float64 arrays:
- diffmath: tensors, tape and primitives
- transport: 1D and sliced Wasserstein distances
- cnp: encoder, mean aggregation and decoder
- tasks: misspecified regression, g-and-kappa and tile completion episodes
- trainer: Adam, cyclic learning rate and the experiment runner

The ``sliced-cnp`` command line tool drives training, evaluation and the
numeric self-check suite.
"""

import logging

from .cnp import ModelParams, init_params, load_checkpoint, save_checkpoint
from .diffmath import Tape, Tensor
from .losses import gaussian_nll, swd_loss, uniform_loglik
from .tasks import make_task
from .trainer import TrainConfig, run_comparison, run_experiment
from .transport import sliced_wasserstein_pow, wasserstein_1d_pow
from .utils import config_parser
from .version import __version__

__all__ = ["Tensor", "Tape", "ModelParams", "init_params", "save_checkpoint",
           "load_checkpoint", "swd_loss", "gaussian_nll", "uniform_loglik",
           "sliced_wasserstein_pow", "wasserstein_1d_pow", "make_task",
           "TrainConfig", "run_experiment", "run_comparison",
           "config_parser", "__version__"]

logging.getLogger(__name__)

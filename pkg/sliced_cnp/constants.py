"""Module housing sliced-cnp constants."""

import logging

from colorama import Fore, init

try:
    from typing import Literal  # type: ignore - python >= 3.8
except ImportError:
    from typing_extensions import Literal  # python < 3.8

__all__ = ["G", "LG", "R", "RED", "C", "Y", "TASKS", "OBJECTIVES", "HEADS",
           "IMAGE_KINDS", "IMAGE_SIZE", "TILE_SIZE", "N_TILES",
           "DEFAULT_N_PROJ", "DEFAULT_POWER", "SIGMA_FLOOR", "GK_C",
           "ADAM_BETA1", "ADAM_BETA2", "ADAM_EPS", "HOLDOUT_OFFSET", "DIRECT",
           "GAUSSIAN"]

logging.getLogger(__name__)

init(autoreset=True)
G = Fore.GREEN  #: used to higlight passed checks and finished runs
LG = Fore.LIGHTGREEN_EX  #: used to highlight written output files
R = Fore.RESET  #: resets the foreground color to default
RED = Fore.RED  #: used to highlight errors and failed checks
C = Fore.LIGHTCYAN_EX  #: used for section headings in CLI mode
Y = Fore.YELLOW  #: used to highlight warnings

#: experiments known to the trainer and the CLI
TASKS = ("uniform_regression", "gk", "tiles")
#: training objectives
OBJECTIVES = ("swd", "gaussian_nll", "uniform_loglik")
#: decoder head emitting predictions directly
DIRECT: Literal["direct"] = "direct"
#: decoder head emitting mean and scale per output dimension
GAUSSIAN: Literal["gaussian"] = "gaussian"
HEADS = (DIRECT, GAUSSIAN)
#: procedural image families of the synthetic corpus
IMAGE_KINDS = ("gradient", "blobs", "stripes")

#: side of the square images used by the tile task
IMAGE_SIZE = 32
#: side of one square tile
TILE_SIZE = 4
#: number of tiles in one image
N_TILES = (IMAGE_SIZE // TILE_SIZE) ** 2

#: projection count used when none is configured
DEFAULT_N_PROJ = 50
#: Wasserstein power used when none is configured
DEFAULT_POWER = 2.0
#: lower bound added to the softplus scale of the gaussian head
SIGMA_FLOOR = 1e-3
#: asymmetry constant of the g-and-kappa quantile function
GK_C = 0.8

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

#: seed offset for held-out data, keeps evaluation disjoint from training
HOLDOUT_OFFSET = 10 ** 6

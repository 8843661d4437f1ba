"""Episode generators of the three experiments and the image corpus.

Use :func:`make_task` to get the :class:`~sliced_cnp.abstract.TaskABC`
implementation named by a run configuration.
"""

import logging
from typing import TYPE_CHECKING, Dict, Type

from ..abstract import TaskABC
from ..constants import TASKS
from ..exceptions import ConfigError
from ._episode import TaskBatch
from .gk import (GkParams, GkTask, gen_gk_episode, gk_quantile, gk_sample,
                 normal_scores)
from .images import (ingest_image_dir, read_pnm, synth_images, to_square,
                     write_pgm)
from .regression import UniformRegressionTask, gen_linear_uniform, ols_fit
from .tiles import (TileGrid, TileTask, gen_tile_episode, image_to_tiles,
                    tiles_to_image)

if TYPE_CHECKING:
    from ..trainer import TrainConfig

__all__ = ["TaskBatch", "GkParams", "TileGrid", "gen_linear_uniform",
           "ols_fit", "gk_quantile", "gk_sample", "gen_gk_episode",
           "normal_scores", "image_to_tiles", "tiles_to_image",
           "gen_tile_episode", "synth_images", "ingest_image_dir",
           "read_pnm", "write_pgm", "to_square", "UniformRegressionTask",
           "GkTask", "TileTask", "make_task"]

log = logging.getLogger(__name__)

_REGISTRY: Dict[str, Type[TaskABC]] = {
    UniformRegressionTask.name: UniformRegressionTask,
    GkTask.name: GkTask,
    TileTask.name: TileTask,
}


def make_task(config: "TrainConfig") -> TaskABC:
    """Instantiate the task named by ``config.task``.

    Raises
    ------
    ConfigError
        if the task name is unknown
    """
    try:
        cls = _REGISTRY[config.task]
    except KeyError:
        raise ConfigError("task", f"unknown task '{config.task}', valid: "
                                  f"{', '.join(TASKS)}")
    task = cls(config)
    log.debug(f"created {task}")
    return task

"""Template module for all experiment task classes."""

import logging
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Dict, FrozenSet, List, Tuple

import numpy as np

from ..exceptions import CheckpointError

if TYPE_CHECKING:
    from pathlib import Path

    from ..cnp import ModelParams
    from ..tasks import TaskBatch
    from ..trainer import TrainConfig
    from ..typeshed import _PATH, _RNG

__all__ = ["TaskABC"]

logging.getLogger(__name__)


class TaskABC(ABC):
    """Source of training episodes and held-out evaluation for one experiment.

    Parameters
    ----------
    config: TrainConfig
        run configuration, tasks read their data settings from it
    """

    __name__: str
    __abstractmethods__: FrozenSet[str]

    #: task name as used by the CLI and configuration
    name: str
    #: True when episodes carry their own context that must not be resampled
    fixed_context: bool = False

    def __init__(self, config: "TrainConfig") -> None:
        self.config = config

    def __str__(self) -> str:
        return f"<{self.__class__.__name__}:{self.name}>"

    @property
    @abstractmethod
    def d_x(self) -> int:
        """Input width of the episodes."""
        raise NotImplementedError

    @property
    @abstractmethod
    def d_y(self) -> int:
        """Output width of the episodes."""
        raise NotImplementedError

    @abstractmethod
    def episode(self, rng: "_RNG") -> "TaskBatch":
        """Draw one training episode.

        Parameters
        ----------
        rng: _RNG
            generator advanced by the draw

        Returns
        -------
        TaskBatch
            targets with an initial context subset
        """
        raise NotImplementedError

    @abstractmethod
    def evaluate(self, params: "ModelParams") -> Dict[str, float]:
        """Held-out evaluation of the model, deterministic for fixed params.

        Returns
        -------
        Dict[str, float]
            always holds ``metric`` where lower is better, tasks may add more
        """
        raise NotImplementedError

    @abstractmethod
    def eval_table(self, params: "ModelParams", n: int, rng: "_RNG"
                   ) -> Tuple[List[str], np.ndarray]:
        """Plot ready evaluation rows.

        Parameters
        ----------
        params: ModelParams
            trained model
        n: int
            number of rows requested
        rng: _RNG
            seed or generator for any fresh draws

        Returns
        -------
        Tuple[List[str], np.ndarray]
            column names and an (n, len(columns)) table
        """
        raise NotImplementedError

    @abstractmethod
    def write_artifacts(self, params: "ModelParams", output_dir: "_PATH"
                        ) -> List["Path"]:
        """Write final predicted-vs-true data files.

        Returns
        -------
        List[Path]
            every file written
        """
        raise NotImplementedError

    def check_params(self, params: "ModelParams"):
        """Ensure model widths fit the task.

        Raises
        ------
        CheckpointError
            if input or output widths differ
        """
        if (params.d_x, params.d_y) != (self.d_x, self.d_y):
            raise CheckpointError(
                f"model expects (d_x, d_y) = ({params.d_x}, {params.d_y}), "
                f"task {self.name} provides ({self.d_x}, {self.d_y})"
            )

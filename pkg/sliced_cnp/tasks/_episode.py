"""Episode container shared by all task generators."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from ..exceptions import ContractError, ShapeError

if TYPE_CHECKING:
    from ..typeshed import _PATH

__all__ = ["TaskBatch"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TaskBatch:
    """One episode: target points and the indices observed as context.

    Parameters
    ----------
    x_target: np.ndarray
        (n, d_x) target inputs
    y_target: np.ndarray
        (n, d_y) target outputs
    context_idx: np.ndarray
        unique row indices of the context subset, 1 <= len <= n

    Raises
    ------
    ShapeError
        if inputs and outputs do not have the same number of rows
    ContractError
        if context indices are empty, repeated or out of range
    """

    x_target: np.ndarray
    y_target: np.ndarray
    context_idx: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x_target, dtype=np.float64)
        y = np.ascontiguousarray(self.y_target, dtype=np.float64)
        idx = np.asarray(self.context_idx, dtype=np.int64).reshape(-1)
        if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ShapeError(f"targets must be (n, d_x) and (n, d_y), got "
                             f"{x.shape} and {y.shape}")
        n = x.shape[0]
        if idx.size < 1 or idx.size > n:
            raise ContractError(f"context size {idx.size} outside [1, {n}]")
        if idx.min() < 0 or idx.max() >= n:
            raise ContractError(f"context index out of range [0, {n})")
        if np.unique(idx).size != idx.size:
            raise ContractError("context indices are not unique")

        object.__setattr__(self, "x_target", x)
        object.__setattr__(self, "y_target", y)
        object.__setattr__(self, "context_idx", idx)

    @property
    def n_target(self) -> int:
        return self.x_target.shape[0]

    @property
    def n_context(self) -> int:
        return self.context_idx.size

    @property
    def d_x(self) -> int:
        return self.x_target.shape[1]

    @property
    def d_y(self) -> int:
        return self.y_target.shape[1]

    @property
    def x_context(self) -> np.ndarray:
        return self.x_target[self.context_idx]

    @property
    def y_context(self) -> np.ndarray:
        return self.y_target[self.context_idx]

    def with_context(self, context_idx: Sequence[int]) -> "TaskBatch":
        """Same targets observed through a different context subset."""
        return TaskBatch(self.x_target, self.y_target, np.asarray(context_idx))

    def to_csv(self, path: "_PATH",
               predictions: Optional[np.ndarray] = None) -> Path:
        """Dump episode as CSV, columns x..., y..., [y_pred...], is_context.

        Parameters
        ----------
        path: _PATH
            output file
        predictions: Optional[np.ndarray]
            (n, d_y) model outputs to write next to the targets

        Returns
        -------
        Path
            written file
        """
        path = Path(path)
        columns = [f"x{i}" for i in range(self.d_x)]
        columns += [f"y{i}" for i in range(self.d_y)]
        blocks = [self.x_target, self.y_target]
        if predictions is not None:
            predictions = np.asarray(predictions, dtype=np.float64)
            if predictions.shape != self.y_target.shape:
                raise ShapeError(f"predictions {predictions.shape} do not "
                                 f"match targets {self.y_target.shape}")
            columns += [f"y_pred{i}" for i in range(self.d_y)]
            blocks.append(predictions)

        is_context = np.zeros((self.n_target, 1))
        is_context[self.context_idx] = 1
        columns.append("is_context")
        blocks.append(is_context)

        table = np.hstack(blocks)
        fmt = ["%.10g"] * (table.shape[1] - 1) + ["%d"]
        np.savetxt(path, table, fmt=fmt, delimiter=",",
                   header=",".join(columns), comments="")
        log.debug(f"episode with {self.n_target} points written to {path}")
        return path

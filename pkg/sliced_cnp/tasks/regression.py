"""Misspecified linear regression: y = slope * x + intercept + gaussian noise.

A uniform noise tube narrower than the gaussian spread gives zero likelihood
for every parameter setting, the sliced distance still has a useful gradient.
"""

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Tuple

import numpy as np

from ..abstract import TaskABC
from ..cnp import predict
from ..constants import HOLDOUT_OFFSET
from ..exceptions import ContractError
from ..transport import sliced_wasserstein_report
from ..utils import as_generator
from ._episode import TaskBatch

if TYPE_CHECKING:
    from ..cnp import ModelParams
    from ..typeshed import _PATH, _RNG

__all__ = ["gen_linear_uniform", "ols_fit", "UniformRegressionTask"]

log = logging.getLogger(__name__)

#: input interval of the generated points
X_RANGE = (-2.0, 2.0)


def gen_linear_uniform(n: int = 500, slope: float = 1.0,
                       intercept: float = 0.0, noise_sd: float = 0.5,
                       x_range: Tuple[float, float] = X_RANGE,
                       rng: "_RNG" = None) -> TaskBatch:
    """Noisy points around a line, every point is part of the context.

    Parameters
    ----------
    n: int
        number of points, at least 2
    slope: float
        line slope
    intercept: float
        line intercept
    noise_sd: float
        standard deviation of the additive gaussian noise
    x_range: Tuple[float, float]
        inputs are drawn uniformly from this interval
    rng: _RNG
        seed or generator

    Returns
    -------
    TaskBatch
        (n, 1) inputs and outputs

    Raises
    ------
    ContractError
        if n < 2, the range is empty or noise_sd is negative

    Examples
    --------
    >>> batch = gen_linear_uniform(n=4, noise_sd=0.0, rng=0)
    >>> bool(np.allclose(batch.y_target, batch.x_target))
    True
    """
    if n < 2:
        raise ContractError(f"need at least 2 points, got {n}")
    low, high = x_range
    if not high > low:
        raise ContractError(f"empty input range {x_range}")
    if noise_sd < 0:
        raise ContractError(f"noise_sd must be >= 0, got {noise_sd}")

    gen = as_generator(rng)
    x = gen.uniform(low, high, size=(n, 1))
    y = slope * x + intercept + gen.normal(0.0, noise_sd, size=(n, 1))
    return TaskBatch(x, y, np.arange(n))


def ols_fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Least squares slope and intercept of y against x."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(slope), float(intercept)


class UniformRegressionTask(TaskABC):
    """Fresh noisy line sample every episode, scored on a fixed holdout."""

    name = "uniform_regression"
    fixed_context = False

    @property
    def d_x(self) -> int:
        return 1

    @property
    def d_y(self) -> int:
        return 1

    def episode(self, rng: "_RNG") -> TaskBatch:
        return gen_linear_uniform(self.config.n_points, rng=rng)

    def _holdout(self) -> TaskBatch:
        return gen_linear_uniform(self.config.n_points,
                                  rng=self.config.seed + HOLDOUT_OFFSET)

    def evaluate(self, params: "ModelParams") -> Dict[str, float]:
        """Sliced distance of joint (x, y) clouds plus the fitted line.

        The whole holdout sample is the context, the prediction line is
        fitted on a dense input grid.
        """
        hold = self._holdout()
        y_pred = predict(params, hold.x_context, hold.y_context,
                         hold.x_target).numpy()
        metric = sliced_wasserstein_report(
            np.hstack([hold.x_target, y_pred]),
            np.hstack([hold.x_target, hold.y_target]),
            n_proj=self.config.n_proj, p=self.config.p,
            seed=self.config.seed + HOLDOUT_OFFSET,
        )
        grid = np.linspace(*X_RANGE, num=self.config.n_eval).reshape(-1, 1)
        slope, intercept = ols_fit(
            grid, predict(params, hold.x_context, hold.y_context, grid).numpy()
        )
        return {"metric": metric, "slope": slope, "intercept": intercept}

    def eval_table(self, params: "ModelParams", n: int, rng: "_RNG"
                   ) -> Tuple[List[str], np.ndarray]:
        """Grid rows ``x, y_true, y_pred``, y_true is the noise free line."""
        context = gen_linear_uniform(self.config.n_points, rng=rng)
        grid = np.linspace(*X_RANGE, num=n).reshape(-1, 1)
        y_pred = predict(params, context.x_context, context.y_context,
                         grid).numpy()
        return ["x", "y_true", "y_pred"], np.hstack([grid, grid, y_pred])

    def write_artifacts(self, params: "ModelParams", output_dir: "_PATH"
                        ) -> List[Path]:
        output_dir = Path(output_dir)
        hold = self._holdout()
        y_pred = predict(params, hold.x_context, hold.y_context,
                         hold.x_target).numpy()
        points = hold.to_csv(output_dir / "predictions.csv", y_pred)

        columns, table = self.eval_table(params, self.config.n_eval,
                                         self.config.seed + HOLDOUT_OFFSET)
        line = output_dir / "prediction_line.csv"
        np.savetxt(line, table, fmt="%.10g", delimiter=",",
                   header=",".join(columns), comments="")
        return [points, line]

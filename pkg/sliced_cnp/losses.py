"""Training objectives: sliced Wasserstein, gaussian NLL and uniform tube.

Every objective returns a :class:`LossReport` whose ``loss`` is the value to
minimize. When predictions are tracked the loss is recorded on their tape.
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict

import numpy as np

from .constants import DEFAULT_N_PROJ, DEFAULT_POWER, DIRECT, GAUSSIAN
from .diffmath import (Tensor, abs_pow, add, as_tensor, concat_cols, div,
                       log, mean, scale, shift, sub, total)
from .exceptions import ContractError, ShapeError
from .transport import (EmpiricalDistribution, sample_projections,
                        sliced_wasserstein_pow)

if TYPE_CHECKING:
    from .typeshed import _HEAD, _RNG, _TENSORLIKE

__all__ = ["LossReport", "swd_loss", "gaussian_nll", "uniform_loglik",
           "OBJECTIVES", "head_for"]

log_ = logging.getLogger(__name__)

_HALF_LOG_2PI = 0.5 * np.log(2 * np.pi)


@dataclass
class LossReport:
    """Objective value with a readable companion metric.

    Parameters
    ----------
    loss: Tensor
        scalar to minimize, tracked when the inputs were
    metric: float
        rooted sliced distance, mean or total log-likelihood
    degenerate: bool
        True when the likelihood is exactly zero and no gradient exists
    """

    loss: Tensor
    metric: float
    degenerate: bool = False

    @property
    def value(self) -> float:
        return self.loss.item()


def _same_rows(*tensors: Tensor):
    rows = {t.shape[0] for t in tensors}
    if len(rows) != 1:
        raise ShapeError(f"row counts differ: {[t.shape for t in tensors]}")
    if 0 in rows:
        raise ContractError("objective needs at least one point")


def swd_loss(y_pred: "_TENSORLIKE", y_true: "_TENSORLIKE",
             x: "_TENSORLIKE", joint: bool = True,
             n_proj: int = DEFAULT_N_PROJ, p: float = DEFAULT_POWER,
             rng: "_RNG" = None) -> LossReport:
    """Sliced Wasserstein objective between predicted and observed points.

    Parameters
    ----------
    y_pred: _TENSORLIKE
        (n, d_y) model output
    y_true: _TENSORLIKE
        (n, d_y) observed outputs
    x: _TENSORLIKE
        (n, d_x) inputs, only used when joint
    joint: bool
        compare (x, y) clouds instead of outputs alone
    n_proj: int
        number of random directions
    p: float
        Wasserstein power
    rng: _RNG
        seed or generator for the directions

    Returns
    -------
    LossReport
        loss is the sliced distance to the power p, metric its p-th root
    """
    y_pred, y_true, x = as_tensor(y_pred), as_tensor(y_true), as_tensor(x)
    _same_rows(y_pred, y_true, x)

    if joint:
        pred, true = concat_cols(x, y_pred), concat_cols(x, y_true)
    else:
        pred, true = y_pred, y_true

    proj = sample_projections(n_proj, pred.shape[1], rng)
    loss = sliced_wasserstein_pow(EmpiricalDistribution(pred),
                                  EmpiricalDistribution(true), proj, p)
    return LossReport(loss, max(loss.item(), 0.0) ** (1.0 / p))


def gaussian_nll(mu: "_TENSORLIKE", sigma: "_TENSORLIKE",
                 y: "_TENSORLIKE") -> LossReport:
    """Mean negative log-likelihood of y under independent normals.

    Returns
    -------
    LossReport
        loss is the mean NLL over all n * d_y entries, metric is the mean
        log-likelihood

    Raises
    ------
    ContractError
        if any scale is not strictly positive
    """
    mu, sigma, y = as_tensor(mu), as_tensor(sigma), as_tensor(y)
    if not (mu.shape == sigma.shape == y.shape):
        raise ShapeError(f"shapes differ: {mu.shape}, {sigma.shape}, "
                         f"{y.shape}")
    _same_rows(mu, sigma, y)
    if np.any(sigma.values <= 0):
        raise ContractError("gaussian scale must be strictly positive")

    sq = abs_pow(sub(y, mu), 2.0)
    per_point = add(log(sigma), div(sq, scale(abs_pow(sigma, 2.0), 2.0)))
    loss = shift(mean(per_point), _HALF_LOG_2PI)
    return LossReport(loss, -loss.item())


def uniform_loglik(y_pred: "_TENSORLIKE", y_true: "_TENSORLIKE",
                   halfwidth: float = 1.0) -> LossReport:
    """Log-likelihood of a uniform noise tube around the predictions.

    Every point inside the tube contributes ``log(1 / (2 halfwidth))``, a
    single point on or outside makes the likelihood zero. The objective is
    piecewise constant so its gradient is exactly zero everywhere.

    Returns
    -------
    LossReport
        metric is the total log-likelihood (``-inf`` when degenerate), loss
        its negation
    """
    if halfwidth <= 0:
        raise ContractError(f"halfwidth must be positive, got {halfwidth}")
    y_pred, y_true = as_tensor(y_pred), as_tensor(y_true)
    if y_pred.shape != y_true.shape:
        raise ShapeError(f"shapes differ: {y_pred.shape} and {y_true.shape}")
    _same_rows(y_pred, y_true)

    inside = np.abs(y_true.values - y_pred.values) < halfwidth
    degenerate = not bool(np.all(inside))
    loglik = (-np.inf if degenerate
              else y_pred.size * np.log(1.0 / (2.0 * halfwidth)))
    if degenerate:
        log_.debug("uniform likelihood is zero, no learning signal")

    # zero-weighted link keeps the loss on the predictions' tape
    loss = shift(scale(total(y_pred), 0.0), -loglik)
    return LossReport(loss, float(loglik), degenerate)


#: objectives by name with the decoder head each one trains
OBJECTIVES: Dict[str, "_HEAD"] = {
    "swd": DIRECT,
    "gaussian_nll": GAUSSIAN,
    "uniform_loglik": DIRECT,
}


def head_for(objective: str) -> "_HEAD":
    """Decoder head an objective needs.

    Raises
    ------
    ContractError
        if the objective is unknown
    """
    try:
        return OBJECTIVES[objective]
    except KeyError:
        raise ContractError(f"unknown objective '{objective}', valid: "
                            f"{tuple(OBJECTIVES)}")

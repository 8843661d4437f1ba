"""Adam optimizer and the triangular cyclic learning rate."""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Tuple, Union, overload

import numpy as np

from ..cnp import ModelParams
from ..constants import ADAM_BETA1, ADAM_BETA2, ADAM_EPS
from ..exceptions import ContractError

if TYPE_CHECKING:
    from ..typeshed import _GRADS

__all__ = ["OptimizerState", "adam_step", "lr_at"]

log = logging.getLogger(__name__)

_WEIGHTS = Dict[str, np.ndarray]


def _weights_of(params: Union[ModelParams, _WEIGHTS]) -> _WEIGHTS:
    return params.weights if isinstance(params, ModelParams) else params


@dataclass(frozen=True)
class OptimizerState:
    """First and second moment per parameter and the optimizer step count.

    Parameters
    ----------
    m: Dict[str, np.ndarray]
        first moment accumulators
    v: Dict[str, np.ndarray]
        second moment accumulators
    step: int
        number of updates applied so far
    """

    m: _WEIGHTS
    v: _WEIGHTS
    step: int = 0

    @classmethod
    def zeros_like(cls, params: Union[ModelParams, _WEIGHTS]
                   ) -> "OptimizerState":
        weights = _weights_of(params)
        return cls({k: np.zeros_like(w) for k, w in weights.items()},
                   {k: np.zeros_like(w) for k, w in weights.items()}, 0)


@overload
def adam_step(params: ModelParams, grads: "_GRADS", state: OptimizerState,
              lr: float, beta1: float = ..., beta2: float = ...,
              eps: float = ...) -> Tuple[ModelParams, OptimizerState]:
    ...
@overload
def adam_step(params: _WEIGHTS, grads: "_GRADS", state: OptimizerState,
              lr: float, beta1: float = ..., beta2: float = ...,
              eps: float = ...) -> Tuple[_WEIGHTS, OptimizerState]:
    ...
def adam_step(params, grads, state, lr, beta1=ADAM_BETA1, beta2=ADAM_BETA2,
              eps=ADAM_EPS):
    """One bias corrected Adam update, inputs are never modified in place.

    Parameters
    ----------
    params: Union[ModelParams, Dict[str, np.ndarray]]
        current parameters
    grads: _GRADS
        gradient of the loss for every parameter
    state: OptimizerState
        moments from the previous step
    lr: float
        learning rate of this step
    beta1: float
        first moment decay
    beta2: float
        second moment decay
    eps: float
        denominator offset

    Returns
    -------
    Tuple[Union[ModelParams, Dict[str, np.ndarray]], OptimizerState]
        updated parameters of the same kind as the input and new state

    Raises
    ------
    ContractError
        if gradient or moment names or shapes do not match the parameters
    """
    weights = _weights_of(params)
    if set(grads) != set(weights) or set(state.m) != set(weights):
        raise ContractError(f"parameter names differ: {sorted(weights)} vs "
                            f"gradients {sorted(grads)}")

    t = state.step + 1
    new_w, new_m, new_v = {}, {}, {}
    for name, w in weights.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != w.shape or state.m[name].shape != w.shape:
            raise ContractError(f"{name}: gradient {g.shape} and moments "
                                f"{state.m[name].shape} must match "
                                f"parameter {w.shape}")
        m = beta1 * state.m[name] + (1 - beta1) * g
        v = beta2 * state.v[name] + (1 - beta2) * g * g
        m_hat = m / (1 - beta1 ** t)
        v_hat = v / (1 - beta2 ** t)
        new_w[name] = w - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name], new_v[name] = m, v

    new_state = OptimizerState(new_m, new_v, t)
    if isinstance(params, ModelParams):
        return params.replace(new_w), new_state
    return new_w, new_state


def lr_at(step: int, lr_base: float, lr_max: float, cycle_steps: int
          ) -> float:
    """Triangular cyclic learning rate.

    Rises linearly from lr_base to lr_max over the first half of each cycle
    and falls back over the second half.

    Examples
    --------
    >>> lr_at(0, 1e-3, 1e-2, 200), lr_at(100, 1e-3, 1e-2, 200)
    (0.001, 0.01)
    """
    if cycle_steps < 2:
        raise ContractError(f"cycle_steps must be >= 2, got {cycle_steps}")
    half = cycle_steps / 2
    cycle = np.floor(1 + step / (2 * half))
    x = abs(step / half - 2 * cycle + 1)
    w = max(0.0, 1 - x)
    return float(lr_base * (1 - w) + lr_max * w)

"""Central finite-difference oracle for reverse-mode gradients."""

import logging
from typing import TYPE_CHECKING, Callable, Dict, Mapping

import numpy as np

from .tensor import Tape, Tensor

if TYPE_CHECKING:
    from ..typeshed import _ARRAY

__all__ = ["numerical_gradient", "relative_error", "check_gradient",
           "check_gradients"]

log = logging.getLogger(__name__)

#: default central difference step
EPS = 1e-5


def numerical_gradient(func: Callable[[np.ndarray], float], x: "_ARRAY",
                       eps: float = EPS) -> np.ndarray:
    """Central difference estimate of the gradient of a scalar function.

    Parameters
    ----------
    func: Callable[[np.ndarray], float]
        scalar function of an array, must not modify its argument
    x: _ARRAY
        evaluation point
    eps: float
        step size

    Returns
    -------
    np.ndarray
        gradient estimate of x's shape
    """
    x = np.array(x, dtype=np.float64)
    grad = np.empty_like(x)
    flat = x.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        up = func(x)
        flat[i] = orig - eps
        down = func(x)
        flat[i] = orig
        out[i] = (up - down) / (2 * eps)
    return grad


def relative_error(analytic: "_ARRAY", numeric: "_ARRAY") -> float:
    """Norm of the difference relative to the larger of the two norms.

    Two zero gradients have relative error 0.
    """
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    scale = max(np.linalg.norm(a), np.linalg.norm(n))
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(a - n) / scale)


def check_gradients(build: Callable[[Dict[str, Tensor]], Tensor],
                    inputs: Mapping[str, "_ARRAY"], eps: float = EPS
                    ) -> Dict[str, float]:
    """Compare tape gradients of a scalar builder with finite differences.

    Parameters
    ----------
    build: Callable[[Dict[str, Tensor]], Tensor]
        function mapping named input tensors to a scalar tensor, it is called
        once with tracked tensors and many times with constants
    inputs: Mapping[str, _ARRAY]
        evaluation point
    eps: float
        finite difference step

    Returns
    -------
    Dict[str, float]
        relative error per input
    """
    values = {k: np.asarray(v, dtype=np.float64) for k, v in inputs.items()}

    tape = Tape()
    tracked = {k: tape.watch(v) for k, v in values.items()}
    grads = tape.backward(build(tracked))

    errors = {}
    for name, tensor in tracked.items():

        def func(v: np.ndarray, name=name) -> float:
            args = {k: Tensor(values[k]) for k in values}
            args[name] = Tensor(v)
            return build(args).item()

        numeric = numerical_gradient(func, values[name], eps)
        analytic = grads[tensor.node].values  # type: ignore
        errors[name] = relative_error(analytic, numeric)
        log.debug(f"gradient check {name}: relative error {errors[name]:.3e}")
    return errors


def check_gradient(build: Callable[[Tensor], Tensor], x: "_ARRAY",
                   eps: float = EPS) -> float:
    """Single input variant of :func:`check_gradients`."""
    return check_gradients(lambda t: build(t["x"]), {"x": x}, eps)["x"]

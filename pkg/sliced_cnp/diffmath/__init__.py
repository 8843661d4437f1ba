"""Minimal reverse-mode differentiation over dense float64 arrays.

Primitives record themselves on a :class:`Tape` whenever one of their inputs
is tracked. Everything runs in 64-bit floating point.
"""

from ._ops import (abs_pow, add, as_tensor, concat_cols, div, elementwise,
                   log, matmul, mean, mul, reduce, relu, reshape, scale,
                   shift, slice_cols, softplus, sort_rows, sub, tanh,
                   tile_rows, total, transpose)
from .gradcheck import (check_gradient, check_gradients, numerical_gradient,
                        relative_error)
from .tensor import Tape, Tensor

__all__ = ["Tensor", "Tape", "as_tensor", "matmul", "elementwise", "add",
           "sub", "mul", "div", "relu", "tanh", "softplus", "log", "abs_pow",
           "scale", "shift", "sort_rows", "reduce", "mean", "total",
           "concat_cols", "slice_cols", "tile_rows", "reshape", "transpose",
           "backward", "numerical_gradient", "relative_error",
           "check_gradient", "check_gradients"]


def backward(loss: Tensor):
    """Gradients of a tracked scalar w.r.t. every leaf of its tape.

    Raises
    ------
    ContractError
        if loss is untracked or not a scalar
    """
    from ..exceptions import ContractError

    if loss.tape is None:
        raise ContractError("loss is not tracked, nothing to differentiate")
    return loss.tape.backward(loss)

"""Differentiable primitives over :class:`Tensor`.

Each primitive computes its forward value with numpy and, when any input is
tracked, records a backward rule on the shared tape. Untracked inputs are
treated as constants. Binary elementwise primitives accept equal shapes or a
row-vector right operand broadcast over the rows of a matrix, nothing more.
"""

import logging
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from ..exceptions import ContractError, ShapeError
from .tensor import Tape, Tensor

if TYPE_CHECKING:
    from ..typeshed import _BACKWARD, _SHAPE, _TENSORLIKE

__all__ = ["as_tensor", "matmul", "elementwise", "add", "sub", "mul", "div",
           "relu", "tanh", "softplus", "log", "abs_pow", "scale", "shift",
           "sort_rows", "reduce", "mean", "total", "concat_cols",
           "slice_cols", "tile_rows", "reshape", "transpose"]

log = logging.getLogger(__name__)


def as_tensor(value: "_TENSORLIKE") -> Tensor:
    """Pass tensors through, wrap anything else as untracked constant."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _tape_of(tensors: Sequence[Tensor]) -> Optional[Tape]:
    tape = None
    for t in tensors:
        if t.tracked:
            if tape is None:
                tape = t.tape
            elif t.tape is not tape:
                raise ContractError("tensors are recorded on different tapes")
    return tape


def _emit(values: np.ndarray, parents: Sequence[Tensor],
          backward: "_BACKWARD") -> Tensor:
    tape = _tape_of(parents)
    if tape is None:
        return Tensor(values)
    return tape.record(values, parents, backward)


def _require_matrix(name: str, t: Tensor):
    if t.ndim != 2:
        raise ShapeError(f"{name} needs a matrix, got shape {t.shape}")


# * linear algebra ###########################################################
def matmul(a: "_TENSORLIKE", b: "_TENSORLIKE") -> Tensor:
    """Matrix product of (m, k) and (k, n) tensors.

    Raises
    ------
    ShapeError
        if operands are not matrices or inner dimensions differ
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply shapes {a.shape} and {b.shape}")

    av, bv = a.values, b.values

    def backward(g):
        return g @ bv.T, av.T @ g

    return _emit(av @ bv, (a, b), backward)


# * elementwise ##############################################################
def _broadcast_kind(a: Tensor, b: Tensor) -> bool:
    """Return True when b is a row vector to broadcast over rows of a."""
    if a.shape == b.shape:
        return False
    if a.ndim == 2 and b.shape in ((a.shape[1],), (1, a.shape[1])):
        return True
    raise ShapeError(f"shapes {a.shape} and {b.shape} are not broadcastable "
                     f"(only row-vector bias broadcast is supported)")


def _unbroadcast(g: np.ndarray, shape: "_SHAPE", row: bool) -> np.ndarray:
    if row:
        return g.sum(axis=0).reshape(shape)
    return g


def add(a: "_TENSORLIKE", b: "_TENSORLIKE") -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    row = _broadcast_kind(a, b)
    shape_b = b.shape

    def backward(g):
        return g, _unbroadcast(g, shape_b, row)

    return _emit(a.values + b.values, (a, b), backward)


def sub(a: "_TENSORLIKE", b: "_TENSORLIKE") -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    row = _broadcast_kind(a, b)
    shape_b = b.shape

    def backward(g):
        return g, -_unbroadcast(g, shape_b, row)

    return _emit(a.values - b.values, (a, b), backward)


def mul(a: "_TENSORLIKE", b: "_TENSORLIKE") -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    row = _broadcast_kind(a, b)
    av, bv = a.values, b.values
    shape_b = b.shape

    def backward(g):
        return g * bv, _unbroadcast(g * av, shape_b, row)

    return _emit(av * bv, (a, b), backward)


def div(a: "_TENSORLIKE", b: "_TENSORLIKE") -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    row = _broadcast_kind(a, b)
    av, bv = a.values, b.values
    out = av / bv
    shape_b = b.shape

    def backward(g):
        return g / bv, _unbroadcast(-g * out / bv, shape_b, row)

    return _emit(out, (a, b), backward)


def relu(a: "_TENSORLIKE") -> Tensor:
    a = as_tensor(a)
    mask = a.values > 0

    def backward(g):
        return (g * mask,)

    return _emit(np.where(mask, a.values, 0.0), (a,), backward)


def tanh(a: "_TENSORLIKE") -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.values)

    def backward(g):
        return (g * (1.0 - out ** 2),)

    return _emit(out, (a,), backward)


def softplus(a: "_TENSORLIKE") -> Tensor:
    """Numerically stable ``log(1 + exp(a))``, strictly positive."""
    a = as_tensor(a)
    av = a.values

    def backward(g):
        return (g * expit(av),)

    return _emit(np.logaddexp(0.0, av), (a,), backward)


def log(a: "_TENSORLIKE") -> Tensor:
    a = as_tensor(a)
    av = a.values
    if np.any(av <= 0):
        raise ContractError("log of non-positive value")

    def backward(g):
        return (g / av,)

    return _emit(np.log(av), (a,), backward)


def abs_pow(a: "_TENSORLIKE", p: float) -> Tensor:
    """Elementwise ``|a|^p``.

    The derivative ``p |a|^(p-1) sign(a)`` is replaced by 0 wherever a is
    exactly 0, which is the subgradient used for every p.
    """
    a = as_tensor(a)
    av = a.values
    absv = np.abs(av)
    zero = absv == 0

    def backward(g):
        with np.errstate(divide="ignore", invalid="ignore"):
            d = p * np.power(absv, p - 1.0) * np.sign(av)
        return (g * np.where(zero, 0.0, d),)

    return _emit(np.power(absv, p), (a,), backward)


def scale(a: "_TENSORLIKE", c: float) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        return (g * c,)

    return _emit(a.values * c, (a,), backward)


def shift(a: "_TENSORLIKE", c: float) -> Tensor:
    """Add constant c to every element."""
    a = as_tensor(a)

    def backward(g):
        return (g,)

    return _emit(a.values + c, (a,), backward)


_UNARY = {"relu": relu, "tanh": tanh, "softplus": softplus, "log": log}
_BINARY = {"add": add, "sub": sub, "mul": mul, "div": div}


def elementwise(op_kind: str, a: "_TENSORLIKE",
                b: Optional["_TENSORLIKE"] = None, *,
                p: Optional[float] = None,
                c: Optional[float] = None) -> Tensor:
    """Dispatch elementwise primitive by name.

    Parameters
    ----------
    op_kind: str
        one of add, sub, mul, div, relu, tanh, softplus, log, abs_pow, scale,
        shift
    a: _TENSORLIKE
        first operand
    b: Optional[_TENSORLIKE]
        second operand, binary kinds only
    p: Optional[float]
        exponent for abs_pow
    c: Optional[float]
        constant for scale and shift

    Raises
    ------
    ContractError
        if op_kind is unknown or its arguments are missing
    ShapeError
        if binary operands cannot be broadcast
    """
    if op_kind in _BINARY:
        if b is None:
            raise ContractError(f"{op_kind} needs two operands")
        return _BINARY[op_kind](a, b)
    elif op_kind in _UNARY:
        return _UNARY[op_kind](a)
    elif op_kind == "abs_pow":
        if p is None:
            raise ContractError("abs_pow needs exponent p")
        return abs_pow(a, p)
    elif op_kind in ("scale", "shift"):
        if c is None:
            raise ContractError(f"{op_kind} needs constant c")
        return scale(a, c) if op_kind == "scale" else shift(a, c)
    else:
        raise ContractError(f"unknown elementwise kind '{op_kind}'")


# * sorting ##################################################################
def sort_rows(a: "_TENSORLIKE") -> Tuple[Tensor, np.ndarray]:
    """Sort every row ascending, ties keep their original order.

    Backward scatters the output gradient to the positions each value came
    from, which is the exact gradient away from ties.

    Returns
    -------
    Tuple[Tensor, np.ndarray]
        sorted tensor and integer permutation per row, ``perm[i, j]`` is the
        original column of the j-th smallest value of row i
    """
    a = as_tensor(a)
    _require_matrix("sort_rows", a)
    perm = np.argsort(a.values, axis=1, kind="stable")
    out = np.take_along_axis(a.values, perm, axis=1)

    def backward(g):
        grad = np.empty_like(g)
        np.put_along_axis(grad, perm, g, axis=1)
        return (grad,)

    return _emit(out, (a,), backward), perm


# * reductions ###############################################################
def reduce(op_kind: str, a: "_TENSORLIKE", axis: Optional[int] = None
           ) -> Tensor:
    """Sum or mean over one axis or over everything.

    Raises
    ------
    ShapeError
        if axis is out of range or the reduced slice is empty
    ContractError
        if op_kind is not mean or sum
    """
    if op_kind not in ("mean", "sum"):
        raise ContractError(f"unknown reduction '{op_kind}'")
    a = as_tensor(a)
    shape = a.shape

    if axis is None:
        count = a.size
    else:
        if not -a.ndim <= axis < a.ndim:
            raise ShapeError(f"axis {axis} out of range for shape {shape}")
        axis = axis % a.ndim
        count = shape[axis]
    if count == 0:
        raise ShapeError(f"cannot {op_kind} over empty slice of shape "
                         f"{shape}")

    factor = 1.0 / count if op_kind == "mean" else 1.0
    out = a.values.sum(axis=axis) * factor

    def backward(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g * factor, shape).copy(),)

    return _emit(out, (a,), backward)


def mean(a: "_TENSORLIKE", axis: Optional[int] = None) -> Tensor:
    return reduce("mean", a, axis)


def total(a: "_TENSORLIKE", axis: Optional[int] = None) -> Tensor:
    return reduce("sum", a, axis)


# * structure ################################################################
def concat_cols(a: "_TENSORLIKE", b: "_TENSORLIKE") -> Tensor:
    """Join (m, p) and (m, q) tensors into (m, p + q)."""
    a, b = as_tensor(a), as_tensor(b)
    _require_matrix("concat_cols", a)
    _require_matrix("concat_cols", b)
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"row counts differ: {a.shape} and {b.shape}")
    split = a.shape[1]

    def backward(g):
        return g[:, :split], g[:, split:]

    return _emit(np.concatenate((a.values, b.values), axis=1), (a, b),
                 backward)


def slice_cols(a: "_TENSORLIKE", start: int, stop: int) -> Tensor:
    """Columns ``start:stop`` of a matrix."""
    a = as_tensor(a)
    _require_matrix("slice_cols", a)
    if not 0 <= start <= stop <= a.shape[1]:
        raise ShapeError(f"column range {start}:{stop} invalid for shape "
                         f"{a.shape}")
    shape = a.shape

    def backward(g):
        grad = np.zeros(shape)
        grad[:, start:stop] = g
        return (grad,)

    return _emit(a.values[:, start:stop], (a,), backward)


def tile_rows(a: "_TENSORLIKE", n: int) -> Tensor:
    """Repeat a vector (or 1-row matrix) n times as rows of a matrix."""
    a = as_tensor(a)
    if a.ndim == 1:
        width = a.shape[0]
    elif a.ndim == 2 and a.shape[0] == 1:
        width = a.shape[1]
    else:
        raise ShapeError(f"tile_rows needs a row vector, got {a.shape}")
    shape = a.shape

    def backward(g):
        return (g.sum(axis=0).reshape(shape),)

    return _emit(np.tile(a.values.reshape(1, width), (n, 1)), (a,), backward)


def reshape(a: "_TENSORLIKE", shape: "_SHAPE") -> Tensor:
    a = as_tensor(a)
    old = a.shape
    try:
        out = a.values.reshape(shape)
    except ValueError:
        raise ShapeError(f"cannot reshape {old} into {tuple(shape)}")

    def backward(g):
        return (g.reshape(old),)

    return _emit(out, (a,), backward)


def transpose(a: "_TENSORLIKE") -> Tensor:
    a = as_tensor(a)
    _require_matrix("transpose", a)

    def backward(g):
        return (g.T,)

    return _emit(a.values.T, (a,), backward)

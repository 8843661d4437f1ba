"""Forward passes of the conditional neural process.

Context pairs are encoded one by one, averaged into a single representation
and every target input is decoded conditioned on that representation.
"""

import logging
from typing import TYPE_CHECKING, Tuple, Union

from ..constants import GAUSSIAN, SIGMA_FLOOR
from ..diffmath import (Tensor, add, as_tensor, concat_cols, matmul, mean,
                        shift, slice_cols, softplus, tanh, tile_rows)
from ..exceptions import ContractError, ShapeError
from .params import BoundParams, ModelParams

if TYPE_CHECKING:
    from ..typeshed import _TENSORLIKE

__all__ = ["encode_context", "decode_targets", "split_gaussian", "predict"]

log = logging.getLogger(__name__)

_PARAMS = Union[ModelParams, BoundParams]


def _bound(params: _PARAMS) -> BoundParams:
    if isinstance(params, BoundParams):
        return params
    return params.bind()


def _mlp(bp: BoundParams, prefix: str, inputs: Tensor) -> Tensor:
    hidden = tanh(add(matmul(inputs, bp[f"{prefix}_w0"]), bp[f"{prefix}_b0"]))
    return add(matmul(hidden, bp[f"{prefix}_w1"]), bp[f"{prefix}_b1"])


def _as_matrix(name: str, t: "_TENSORLIKE", width: int) -> Tensor:
    t = as_tensor(t)
    if t.ndim != 2 or t.shape[1] != width:
        raise ShapeError(f"{name} must be (n, {width}), got {t.shape}")
    return t


def encode_context(params: _PARAMS, x_c: "_TENSORLIKE", y_c: "_TENSORLIKE"
                   ) -> Tensor:
    """Encode k context pairs and aggregate them by their mean.

    Parameters
    ----------
    params: Union[ModelParams, BoundParams]
        model weights, bound ones keep the pass on their tape
    x_c: _TENSORLIKE
        (k, d_x) context inputs
    y_c: _TENSORLIKE
        (k, d_y) context outputs

    Returns
    -------
    Tensor
        representation r_C of shape (r_dim,)

    Raises
    ------
    ContractError
        if the context is empty
    ShapeError
        if widths do not match the parameters
    """
    bp = _bound(params)
    p = bp.params
    x_c = _as_matrix("x_c", x_c, p.d_x)
    y_c = _as_matrix("y_c", y_c, p.d_y)
    if x_c.shape[0] == 0:
        raise ContractError("context set is empty")
    if x_c.shape[0] != y_c.shape[0]:
        raise ShapeError(f"context sizes differ: {x_c.shape} and {y_c.shape}")

    r_i = _mlp(bp, "enc", concat_cols(x_c, y_c))
    return mean(r_i, axis=0)


def decode_targets(params: _PARAMS, x_t: "_TENSORLIKE", r_C: "_TENSORLIKE"
                   ) -> Tensor:
    """Decode target inputs conditioned on the context representation.

    Returns
    -------
    Tensor
        (n, d_y) predictions for the direct head, (n, 2 * d_y) with means in
        the first d_y columns and positive scales in the rest for the
        gaussian head

    Raises
    ------
    ShapeError
        if r_C or x_t widths do not match the parameters
    """
    bp = _bound(params)
    p = bp.params
    x_t = _as_matrix("x_t", x_t, p.d_x)
    r_C = as_tensor(r_C)
    if r_C.shape not in ((p.r_dim,), (1, p.r_dim)):
        raise ShapeError(f"r_C has shape {r_C.shape}, model expects "
                         f"({p.r_dim},)")

    features = concat_cols(x_t, tile_rows(r_C, x_t.shape[0]))
    out = _mlp(bp, "dec", features)
    if p.head != GAUSSIAN:
        return out

    mu = slice_cols(out, 0, p.d_y)
    sigma = shift(softplus(slice_cols(out, p.d_y, 2 * p.d_y)), SIGMA_FLOOR)
    return concat_cols(mu, sigma)


def split_gaussian(out: Tensor, d_y: int) -> Tuple[Tensor, Tensor]:
    """Separate gaussian head output into mean and scale."""
    if out.ndim != 2 or out.shape[1] != 2 * d_y:
        raise ShapeError(f"gaussian output must be (n, {2 * d_y}), got "
                         f"{out.shape}")
    return slice_cols(out, 0, d_y), slice_cols(out, d_y, 2 * d_y)


def predict(params: _PARAMS, x_c: "_TENSORLIKE", y_c: "_TENSORLIKE",
            x_t: "_TENSORLIKE") -> Tensor:
    """Point predictions for targets, gaussian head yields its mean."""
    bp = _bound(params)
    out = decode_targets(bp, x_t, encode_context(bp, x_c, y_c))
    if bp.params.head == GAUSSIAN:
        return split_gaussian(out, bp.params.d_y)[0]
    return out

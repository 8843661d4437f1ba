"""Module providing persistance methods for model parameters.

A checkpoint is one file: a single line JSON header terminated by a newline
followed by the raw little-endian float64 values of every parameter tensor
in :data:`PARAM_NAMES` order.
"""

import logging
import os
from json import JSONDecodeError, dumps, loads
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Optional, Tuple

import numpy as np

from ..exceptions import CheckpointError, ShapeError
from ..version import __version__
from .params import PARAM_NAMES, ModelParams

if TYPE_CHECKING:
    from ..typeshed import _PATH

__all__ = ["to_dict", "from_dict", "save_checkpoint", "load_checkpoint"]

log = logging.getLogger(__name__)

#: checkpoint format tag stored in every header
FORMAT = "sliced-cnp-checkpoint/1"
_DTYPE = np.dtype("<f8")


def to_dict(params: ModelParams, seed: Optional[int] = None,
            step: int = 0, **extra: Any) -> Dict[str, Any]:
    """Saves everything except the weight values to dictionary.

    Parameters
    ----------
    params : ModelParams
        model to describe
    seed : Optional[int]
        seed the model was initialized with
    step : int
        number of optimizer steps taken
    **extra : Any
        additional JSON serializable entries, e.g. task name

    Returns
    -------
    Dict[str, Any]
        checkpoint header
    """
    return {
        "format": FORMAT,
        "version": __version__,
        "d_x": params.d_x,
        "d_y": params.d_y,
        "hidden": params.hidden,
        "r_dim": params.r_dim,
        "head": params.head,
        "seed": seed,
        "step": step,
        "shapes": {k: list(v.shape) for k, v in params.items()},
        **extra,
    }


def from_dict(header: Dict[str, Any], flat: np.ndarray) -> ModelParams:
    """Rebuild parameters from header and concatenated values.

    Raises
    ------
    CheckpointError
        if header keys are missing or the value count does not fit shapes
    """
    try:
        shapes = {k: tuple(header["shapes"][k]) for k in PARAM_NAMES}
        sizes = (header["d_x"], header["d_y"], header["hidden"],
                 header["r_dim"], header["head"])
    except (KeyError, TypeError) as e:
        raise CheckpointError(f"checkpoint header is missing {e}")

    expected = sum(int(np.prod(s)) for s in shapes.values())
    if flat.size != expected:
        raise CheckpointError(f"checkpoint holds {flat.size} values, header "
                              f"shapes need {expected}")

    weights = {}
    offset = 0
    for name in PARAM_NAMES:
        n = int(np.prod(shapes[name]))
        weights[name] = flat[offset:offset + n].reshape(shapes[name]).copy()
        offset += n

    try:
        return ModelParams(*sizes, weights=weights)
    except ShapeError as e:
        raise CheckpointError(f"inconsistent checkpoint: {e}")


def save_checkpoint(path: "_PATH", params: ModelParams,
                    seed: Optional[int] = None, step: int = 0,
                    **extra: Any) -> Path:
    """Write parameters atomically, a partially written file never appears.

    Returns
    -------
    Path
        path of the written checkpoint
    """
    path = Path(path)
    header = dumps(to_dict(params, seed=seed, step=step, **extra),
                   sort_keys=True)
    tmp = path.with_name(path.name + ".part")
    with tmp.open("wb") as f:
        f.write(header.encode("utf-8") + b"\n")
        for _, w in params.items():
            f.write(np.ascontiguousarray(w, dtype=_DTYPE).tobytes())
    os.replace(tmp, path)
    log.info(f"checkpoint written to {path} (step {step})")
    return path


def load_checkpoint(path: "_PATH") -> Tuple[ModelParams, Dict[str, Any]]:
    """Read checkpoint written by :func:`save_checkpoint`.

    Raises
    ------
    CheckpointError
        if the file is missing, truncated or not a checkpoint
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}")

    head, sep, body = raw.partition(b"\n")
    try:
        header = loads(head.decode("utf-8")) if sep else None
    except (UnicodeDecodeError, JSONDecodeError):
        header = None
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise CheckpointError(f"{path} is not a sliced-cnp checkpoint")
    if len(body) % _DTYPE.itemsize:
        raise CheckpointError(f"{path} is truncated")

    params = from_dict(header, np.frombuffer(body, dtype=_DTYPE))
    return params, header

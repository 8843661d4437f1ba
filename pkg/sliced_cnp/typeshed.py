"""Module containing typing aliases for sliced-cnp."""

from typing import (TYPE_CHECKING, Callable, Dict, List, Optional, Sequence,
                    Tuple, Union)

import numpy as np

try:
    from typing import Literal  # type: ignore - python >= 3.8
except ImportError:
    from typing_extensions import Literal  # python < 3.8

if TYPE_CHECKING:
    from os import PathLike

    from .diffmath import Tensor

#: anything that can be turned into float64 numpy array
_ARRAY = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]], float]
#: tensor or a raw array that will be wrapped as untracked constant
_TENSORLIKE = Union["Tensor", _ARRAY]
#: integer seed, numpy generator or None for fresh entropy
_RNG = Union[None, int, np.random.Generator]
#: accepted path types
_PATH = Union[str, "PathLike[str]"]
#: tensor shape
_SHAPE = Tuple[int, ...]
#: backward rule of one tape node, maps output gradient to parent gradients
_BACKWARD = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]
#: gradient of each named parameter
_GRADS = Dict[str, np.ndarray]
#: list of images, each of shape (32, 32, channels)
_IMAGES = List[np.ndarray]
#: training objective name
_OBJECTIVE = Literal["swd", "gaussian_nll", "uniform_loglik"]
#: decoder head kind
_HEAD = Literal["direct", "gaussian"]
#: experiment name
_TASK = Literal["uniform_regression", "gk", "tiles"]
#: synthetic image family
_IMAGE_KIND = Literal["gradient", "blobs", "stripes", "mixed"]

__all__ = ["_ARRAY", "_TENSORLIKE", "_RNG", "_PATH", "_SHAPE", "_BACKWARD",
           "_GRADS", "_IMAGES", "_OBJECTIVE", "_HEAD", "_TASK",
           "_IMAGE_KIND"]

"""Encoder/decoder weights of the conditional neural process."""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterator, Optional, Tuple

import numpy as np

from ..constants import DIRECT, GAUSSIAN, HEADS
from ..diffmath import Tape, Tensor
from ..exceptions import ContractError, ShapeError
from ..utils import as_generator

if TYPE_CHECKING:
    from ..typeshed import _HEAD, _RNG, _SHAPE

__all__ = ["ModelParams", "BoundParams", "init_params", "PARAM_NAMES"]

log = logging.getLogger(__name__)

#: declaration order of parameter tensors, also the checkpoint order
PARAM_NAMES = ("enc_w0", "enc_b0", "enc_w1", "enc_b1",
               "dec_w0", "dec_b0", "dec_w1", "dec_b1")


@dataclass
class ModelParams:
    """Weights of two 2-layer fully connected networks plus their sizes.

    The encoder maps ``d_x + d_y -> hidden -> r_dim``, the decoder
    ``d_x + r_dim -> hidden -> out_width`` where out_width is d_y for the
    direct head and 2 * d_y for the gaussian head. Biases are (1, width) rows.

    Parameters
    ----------
    d_x: int
        input width
    d_y: int
        output width
    hidden: int
        hidden layer width shared by encoder and decoder
    r_dim: int
        width of the aggregated representation
    head: _HEAD
        decoder output kind
    weights: Dict[str, np.ndarray]
        arrays keyed by :data:`PARAM_NAMES`

    Raises
    ------
    ShapeError
        if a weight does not have the shape implied by the sizes
    """

    d_x: int
    d_y: int
    hidden: int
    r_dim: int
    head: "_HEAD"
    weights: Dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        if self.head not in HEADS:
            raise ContractError(f"unknown head '{self.head}', valid: {HEADS}")
        if min(self.d_x, self.d_y, self.hidden, self.r_dim) < 1:
            raise ContractError("all layer sizes must be >= 1")
        expected = self.shapes()
        missing = set(expected) - set(self.weights)
        if missing:
            raise ShapeError(f"missing parameters: {sorted(missing)}")
        for name, shape in expected.items():
            got = np.shape(self.weights[name])
            if got != shape:
                raise ShapeError(f"{name} has shape {got}, expected {shape}")

    @property
    def out_width(self) -> int:
        return 2 * self.d_y if self.head == GAUSSIAN else self.d_y

    def shapes(self) -> Dict[str, "_SHAPE"]:
        """Shape of every parameter implied by the layer sizes."""
        return _layer_shapes(self.d_x, self.d_y, self.hidden, self.r_dim,
                             self.out_width)

    @property
    def encoder(self) -> Dict[str, np.ndarray]:
        return {k: v for k, v in self.weights.items() if k.startswith("enc")}

    @property
    def decoder(self) -> Dict[str, np.ndarray]:
        return {k: v for k, v in self.weights.items() if k.startswith("dec")}

    @property
    def n_params(self) -> int:
        return int(sum(w.size for w in self.weights.values()))

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        """Parameters in declaration order."""
        for name in PARAM_NAMES:
            yield name, self.weights[name]

    def replace(self, weights: Dict[str, np.ndarray]) -> "ModelParams":
        """Copy with new weight arrays and identical sizes."""
        return ModelParams(self.d_x, self.d_y, self.hidden, self.r_dim,
                           self.head, dict(weights))

    def bind(self, tape: Optional[Tape] = None) -> "BoundParams":
        """Wrap weights as tensors, tracked on tape when one is given."""
        if tape is None:
            tensors = {k: Tensor(v) for k, v in self.items()}
        else:
            tensors = {k: tape.watch(v) for k, v in self.items()}
        return BoundParams(self, tensors)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(w)) for w in self.weights.values())

    def equal(self, other: "ModelParams") -> bool:
        """Bitwise equality of sizes and all weights."""
        return (self.shapes() == other.shapes() and self.head == other.head
                and all(np.array_equal(self.weights[k], other.weights[k])
                        for k in PARAM_NAMES))


@dataclass
class BoundParams:
    """Parameters wrapped as tensors for one forward pass."""

    params: ModelParams
    tensors: Dict[str, Tensor]

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def gradients(self, grads: Dict[int, Tensor]) -> Dict[str, np.ndarray]:
        """Pick gradients of the bound tensors out of a tape result."""
        return {name: grads[t.node].values  # type: ignore
                for name, t in self.tensors.items()}


def _layer_shapes(d_x: int, d_y: int, hidden: int, r_dim: int,
                  out_width: int) -> Dict[str, "_SHAPE"]:
    return {
        "enc_w0": (d_x + d_y, hidden),
        "enc_b0": (1, hidden),
        "enc_w1": (hidden, r_dim),
        "enc_b1": (1, r_dim),
        "dec_w0": (d_x + r_dim, hidden),
        "dec_b0": (1, hidden),
        "dec_w1": (hidden, out_width),
        "dec_b1": (1, out_width),
    }


def init_params(d_x: int, d_y: int, hidden: int = 64, r_dim: int = 32,
                head: "_HEAD" = DIRECT, rng: "_RNG" = None) -> ModelParams:
    """Initialize weights from ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))``.

    Biases start at zero. The draw order follows :data:`PARAM_NAMES` so a
    fixed seed always gives the same parameters.

    Raises
    ------
    ContractError
        if any size is smaller than one or the head is unknown
    """
    if min(d_x, d_y, hidden, r_dim) < 1:
        raise ContractError("all layer sizes must be >= 1")
    if head not in HEADS:
        raise ContractError(f"unknown head '{head}', valid: {HEADS}")

    gen = as_generator(rng)
    out_width = 2 * d_y if head == GAUSSIAN else d_y
    weights: Dict[str, np.ndarray] = {}
    for name, shape in _layer_shapes(d_x, d_y, hidden, r_dim,
                                     out_width).items():
        if "_b" in name:
            weights[name] = np.zeros(shape)
        else:
            bound = 1.0 / np.sqrt(shape[0])
            weights[name] = gen.uniform(-bound, bound, size=shape)

    params = ModelParams(d_x, d_y, hidden, r_dim, head, weights)
    log.debug(f"initialized {params.n_params} parameters, head={head}")
    return params

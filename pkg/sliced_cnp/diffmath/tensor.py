"""Dense float64 tensor and the append-only tape recording its history."""

import logging
from typing import TYPE_CHECKING, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from ..exceptions import ContractError

if TYPE_CHECKING:
    from ..typeshed import _ARRAY, _BACKWARD, _SHAPE

__all__ = ["Tensor", "Tape"]

log = logging.getLogger(__name__)


class Tensor:
    """Dense real array, optionally tracked on a :class:`Tape`.

    Values are always stored as C-contiguous float64 so the flat row-major
    view and the shape describe the same buffer.

    Parameters
    ----------
    values: _ARRAY
        anything numpy can convert to float64 array
    tape: Optional[Tape]
        tape the tensor is recorded on, None for constants
    node: Optional[int]
        identifier of the tape node that produced the tensor

    Warnings
    --------
    Do not create tracked tensors by hand, use :meth:`Tape.watch` or the
    primitives in :mod:`sliced_cnp.diffmath`.
    """

    __slots__ = ("values", "tape", "node")

    def __init__(self, values: "_ARRAY", tape: Optional["Tape"] = None,
                 node: Optional[int] = None) -> None:
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.tape = tape
        self.node = node

    @property
    def shape(self) -> "_SHAPE":
        return tuple(self.values.shape)

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def tracked(self) -> bool:
        """True when gradients can flow to this tensor."""
        return self.tape is not None and self.node is not None

    @property
    def T(self) -> "Tensor":
        from . import _ops
        return _ops.transpose(self)

    def flat(self) -> List[float]:
        """Row-major values as plain python floats."""
        return self.values.ravel().tolist()

    def item(self) -> float:
        if self.size != 1:
            raise ContractError(f"item() needs a single value, tensor has "
                                f"shape {self.shape}")
        return float(self.values.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.values.copy()

    def detach(self) -> "Tensor":
        """Untracked copy sharing no tape history."""
        return Tensor(self.values.copy())

    def __repr__(self) -> str:
        tag = f", node={self.node}" if self.tracked else ""
        return f"Tensor(shape={self.shape}{tag})"

    def __len__(self) -> int:
        return self.shape[0] if self.shape else 1

    def __add__(self, other):
        from . import _ops
        if np.isscalar(other):
            return _ops.shift(self, float(other))
        return _ops.add(self, other)

    def __radd__(self, other):
        from . import _ops
        if np.isscalar(other):
            return _ops.shift(self, float(other))
        return _ops.add(other, self)

    def __sub__(self, other):
        from . import _ops
        if np.isscalar(other):
            return _ops.shift(self, -float(other))
        return _ops.sub(self, other)

    def __rsub__(self, other):
        from . import _ops
        if np.isscalar(other):
            return _ops.shift(_ops.scale(self, -1.0), float(other))
        return _ops.sub(other, self)

    def __mul__(self, other):
        from . import _ops
        if np.isscalar(other):
            return _ops.scale(self, float(other))
        return _ops.mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        from . import _ops
        if np.isscalar(other):
            return _ops.scale(self, 1.0 / float(other))
        return _ops.div(self, other)

    def __neg__(self):
        from . import _ops
        return _ops.scale(self, -1.0)

    def __matmul__(self, other):
        from . import _ops
        return _ops.matmul(self, other)

    def __rmatmul__(self, other):
        from . import _ops
        return _ops.matmul(other, self)


class _Node(NamedTuple):

    parents: Sequence[int]
    backward: Optional["_BACKWARD"]
    shape: "_SHAPE"


class Tape:
    """Append-only record of operations for reverse-mode differentiation.

    Nodes are appended in execution order so every parent precedes its
    children. :meth:`backward` walks the nodes once, newest first. A tape is
    meant to live for exactly one training step and must not be shared
    between threads; independent tapes do not share any state.

    Examples
    --------
    >>> tape = Tape()
    >>> x = tape.watch([1.0, 2.0])
    >>> loss = reduce("sum", abs_pow(x, 2))
    >>> tape.backward(loss)[x.node].values
    array([2., 4.])
    """

    def __init__(self) -> None:
        self._nodes: List[_Node] = []

    def __len__(self) -> int:
        return len(self._nodes)

    def watch(self, values: "_ARRAY") -> Tensor:
        """Register a leaf tensor whose gradient will be reported."""
        tensor = Tensor(values)
        tensor.tape = self
        tensor.node = self._append(_Node((), None, tensor.shape))
        return tensor

    def record(self, values: np.ndarray, parents: Sequence[Tensor],
               backward: "_BACKWARD") -> Tensor:
        """Append result of a primitive together with its backward rule.

        Parameters
        ----------
        values: np.ndarray
            forward result
        parents: Sequence[Tensor]
            operation inputs, untracked inputs are kept as placeholders so the
            backward rule may return gradients positionally
        backward: _BACKWARD
            maps output gradient to a tuple with one entry per parent

        Returns
        -------
        Tensor
            tracked output
        """
        ids = tuple(p.node if p.tracked else -1 for p in parents)
        tensor = Tensor(values)
        tensor.tape = self
        tensor.node = self._append(_Node(ids, backward, tensor.shape))
        return tensor

    def _append(self, node: _Node) -> int:
        self._nodes.append(node)
        return len(self._nodes) - 1

    def _check_loss(self, loss: Tensor):
        if not loss.tracked or loss.tape is not self:
            raise ContractError("loss is not tracked on this tape")
        if loss.size != 1:
            raise ContractError(f"backward needs a scalar loss, got shape "
                                f"{loss.shape}")

    def backward(self, loss: Tensor) -> Dict[int, Tensor]:
        """Gradient of scalar loss w.r.t. every leaf of the tape.

        Leaves that do not influence the loss get zero gradient. The tape is
        not modified, repeated calls give identical results.

        Parameters
        ----------
        loss: Tensor
            tracked scalar

        Returns
        -------
        Dict[int, Tensor]
            leaf node id -> gradient tensor of the leaf's shape

        Raises
        ------
        ContractError
            if loss is not a scalar tracked on this tape
        """
        self._check_loss(loss)

        grads: Dict[int, np.ndarray] = {
            loss.node: np.ones(self._nodes[loss.node].shape)  # type: ignore
        }
        for node_id in range(loss.node, -1, -1):  # type: ignore
            node = self._nodes[node_id]
            g = grads.get(node_id)
            if g is None or node.backward is None:
                continue
            for parent, pg in zip(node.parents, node.backward(g)):
                if parent < 0 or pg is None:
                    continue
                if parent in grads:
                    grads[parent] = grads[parent] + pg
                else:
                    grads[parent] = pg

        leaves = {}
        for node_id, node in enumerate(self._nodes):
            if node.backward is None:
                g = grads.get(node_id)
                leaves[node_id] = Tensor(np.zeros(node.shape) if g is None
                                         else g)
        log.debug(f"backward over {loss.node + 1} nodes, "  # type: ignore
                  f"{len(leaves)} leaves")
        return leaves

    def gradient(self, loss: Tensor, wrt: Sequence[Tensor]) -> List[Tensor]:
        """Gradients of loss for selected leaves, in the order given."""
        grads = self.backward(loss)
        out = []
        for tensor in wrt:
            if tensor.tape is not self or tensor.node not in grads:
                raise ContractError(f"{tensor!r} is not a leaf of this tape")
            out.append(grads[tensor.node])  # type: ignore
        return out

"""Optimal-transport distances between empirical distributions.

One dimensional distances come from matching sorted samples. The sliced
distance projects both clouds on random unit directions, matches each
projection the same way and averages. Both return p-th powers, the rooted
value is only offered as a reporting metric.
"""

import logging
from dataclasses import dataclass
from itertools import permutations
from typing import TYPE_CHECKING, Optional, Union

import numpy as np

from .constants import DEFAULT_N_PROJ, DEFAULT_POWER
from .diffmath import (Tensor, abs_pow, as_tensor, matmul, mean, reshape,
                       sort_rows, sub, transpose)
from .exceptions import ContractError, ShapeError
from .utils import as_generator, seed_of

if TYPE_CHECKING:
    from .typeshed import _ARRAY, _RNG, _TENSORLIKE

__all__ = ["EmpiricalDistribution", "ProjectionSet", "wasserstein_1d_pow",
           "wasserstein_1d_bruteforce", "sample_projections",
           "sliced_wasserstein_pow", "sliced_wasserstein_report"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Uniform measure over the rows of an (m, d) sample matrix.

    Raises
    ------
    ContractError
        if there are no samples or some are not finite
    """

    samples: Tensor

    def __post_init__(self):
        if self.samples.ndim != 2:
            raise ShapeError(f"samples must be (m, d), got "
                             f"{self.samples.shape}")
        if self.samples.shape[0] < 1:
            raise ContractError("empirical distribution needs at least one "
                                "sample")
        if not np.all(np.isfinite(self.samples.values)):
            raise ContractError("samples must be finite")

    @classmethod
    def from_array(cls, samples: "_TENSORLIKE") -> "EmpiricalDistribution":
        """Wrap vector (treated as m 1-D samples) or matrix of samples."""
        t = as_tensor(samples)
        if t.ndim == 1:
            t = reshape(t, (t.shape[0], 1))
        return cls(t)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def dimension(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class ProjectionSet:
    """Unit directions on the sphere used to slice a distance."""

    directions: np.ndarray
    seed: Optional[int] = None

    @property
    def n_proj(self) -> int:
        return self.directions.shape[0]

    @property
    def dimension(self) -> int:
        return self.directions.shape[1]


_DIST = Union[EmpiricalDistribution, "_TENSORLIKE"]


def _as_distribution(x: _DIST) -> EmpiricalDistribution:
    if isinstance(x, EmpiricalDistribution):
        return x
    return EmpiricalDistribution.from_array(x)


def _check_power(p: float):
    if p < 1:
        raise ContractError(f"Wasserstein power must be >= 1, got {p}")


def _as_row(v: "_TENSORLIKE") -> Tensor:
    t = as_tensor(v)
    if t.ndim == 2 and 1 in t.shape:
        return reshape(t, (1, t.size))
    if t.ndim != 1:
        raise ShapeError(f"expected a vector, got shape {t.shape}")
    return reshape(t, (1, t.shape[0]))


def wasserstein_1d_pow(a: "_TENSORLIKE", b: "_TENSORLIKE", p: float = 1.0
                       ) -> Tensor:
    """p-th power of the 1-D p-Wasserstein distance between equal-size samples.

    ``(1/m) sum |a_(i) - b_(i)|^p`` over the sorted orders of a and b.

    Parameters
    ----------
    a: _TENSORLIKE
        m samples, need not be sorted
    b: _TENSORLIKE
        m samples
    p: float
        power, at least 1

    Returns
    -------
    Tensor
        scalar, differentiable w.r.t. tracked inputs

    Raises
    ------
    ContractError
        if sample counts differ, are zero or p < 1
    """
    _check_power(p)
    ra, rb = _as_row(a), _as_row(b)
    if ra.shape[1] == 0 or rb.shape[1] == 0:
        raise ContractError("Wasserstein distance needs at least one sample")
    if ra.shape != rb.shape:
        raise ContractError(f"sample counts differ: {ra.shape[1]} and "
                            f"{rb.shape[1]}")

    sa, _ = sort_rows(ra)
    sb, _ = sort_rows(rb)
    return mean(abs_pow(sub(sa, sb), p))


def wasserstein_1d_bruteforce(a: "_ARRAY", b: "_ARRAY", p: float = 1.0
                              ) -> float:
    """Minimum over all pairings of the mean p-th power cost.

    Exponential in the sample count, intended as an oracle for tiny inputs.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size != b.size or a.size == 0:
        raise ContractError("brute force needs equal, non-zero sample counts")
    if a.size > 8:
        raise ContractError(f"{a.size}! pairings is too many for brute force")

    perms = np.array(list(permutations(range(b.size))))
    costs = np.mean(np.abs(a[None, :] - b[perms]) ** p, axis=1)
    return float(costs.min())


def sample_projections(n_proj: int, d: int, rng: "_RNG" = None
                       ) -> ProjectionSet:
    """Draw directions uniformly on the unit sphere.

    Standard normal rows are normalized to unit length.

    Parameters
    ----------
    n_proj: int
        number of directions
    d: int
        ambient dimension
    rng: _RNG
        seed or generator

    Raises
    ------
    ContractError
        if n_proj or d is smaller than one
    """
    if d < 1:
        raise ContractError(f"projection dimension must be >= 1, got {d}")
    if n_proj < 1:
        raise ContractError(f"need at least one projection, got {n_proj}")

    gen = as_generator(rng)
    directions = gen.standard_normal((n_proj, d))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    # zero rows cannot be normalized
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        directions[bad] = gen.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(directions, axis=1, keepdims=True)
    return ProjectionSet(directions / norms, seed=seed_of(rng))


def sliced_wasserstein_pow(X: _DIST, Y: _DIST, proj: ProjectionSet,
                           p: float = DEFAULT_POWER) -> Tensor:
    """Monte-Carlo sliced Wasserstein distance raised to the power p.

    Both clouds are projected on every direction, the projections are
    sorted and ``|difference|^p`` is averaged over samples and directions.

    Parameters
    ----------
    X: EmpiricalDistribution
        (m, d) samples, typically the model output
    Y: EmpiricalDistribution
        (m, d) samples of the target distribution
    proj: ProjectionSet
        directions of dimension d
    p: float
        Wasserstein power

    Returns
    -------
    Tensor
        scalar, differentiable w.r.t. tracked X and Y

    Raises
    ------
    ContractError
        if sample counts, dimensions or projection dimension disagree
    """
    _check_power(p)
    X, Y = _as_distribution(X), _as_distribution(Y)
    if X.samples.shape != Y.samples.shape:
        raise ContractError(f"sample shapes differ: {X.samples.shape} and "
                            f"{Y.samples.shape}")
    if proj.dimension != X.dimension:
        raise ContractError(f"projections live in {proj.dimension} "
                            f"dimensions, samples in {X.dimension}")

    pt = proj.directions.T
    x_hat, _ = sort_rows(transpose(matmul(X.samples, pt)))
    y_hat, _ = sort_rows(transpose(matmul(Y.samples, pt)))
    return mean(abs_pow(sub(x_hat, y_hat), p))


def sliced_wasserstein_report(X: _DIST, Y: _DIST,
                              n_proj: int = DEFAULT_N_PROJ,
                              p: float = DEFAULT_POWER,
                              seed: "_RNG" = None) -> float:
    """Rooted sliced distance for logging, nothing is differentiated.

    Returns
    -------
    float
        ``sliced_wasserstein_pow ** (1 / p)`` with fresh directions
    """
    X, Y = _as_distribution(X), _as_distribution(Y)
    proj = sample_projections(n_proj, X.dimension, seed)
    value = sliced_wasserstein_pow(
        EmpiricalDistribution(X.samples.detach()),
        EmpiricalDistribution(Y.samples.detach()), proj, p
    ).item()
    return float(max(value, 0.0) ** (1.0 / p))

"""The g-and-kappa distribution, defined only through its quantile function.

Sampling is trivial: plug standard normal draws into the quantile formula.
The likelihood has no closed form, so the model is trained on samples only.
The CNP conditions on quantile positions ``r`` and learns ``r -> Q(r)``.
The model reads positions on the normal-score scale ``z = Phi^-1(r)``, where
the quantile function is smooth instead of diverging at both ends.
"""

import logging
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Tuple

import numpy as np
from scipy.stats import norm

from ..abstract import TaskABC
from ..cnp import predict
from ..constants import GK_C, HOLDOUT_OFFSET
from ..exceptions import ContractError
from ..transport import wasserstein_1d_pow
from ..utils import as_generator
from ._episode import TaskBatch

if TYPE_CHECKING:
    from ..cnp import ModelParams
    from ..typeshed import _ARRAY, _PATH, _RNG

__all__ = ["GkParams", "gk_quantile", "gk_sample", "gen_gk_episode",
           "normal_scores", "GkTask"]

log = logging.getLogger(__name__)

#: inclusive bounds of every g-and-kappa parameter
THETA_BOUNDS = (0.0, 10.0)
_R_LOW = np.finfo(np.float64).eps


@dataclass(frozen=True)
class GkParams:
    """Location a, scale b, skewness g and kurtosis kappa.

    Raises
    ------
    ContractError
        if any component lies outside [0, 10]
    """

    a: float
    b: float
    g: float
    kappa: float

    def __post_init__(self):
        low, high = THETA_BOUNDS
        for name, value in zip(("a", "b", "g", "kappa"), astuple(self)):
            if not low <= value <= high:
                raise ContractError(f"g-and-kappa parameter {name}={value} "
                                    f"outside [{low}, {high}]")

    @classmethod
    def from_sequence(cls, values: "_ARRAY") -> "GkParams":
        values = [float(v) for v in np.asarray(values).reshape(-1)]
        if len(values) != 4:
            raise ContractError(f"theta needs 4 values, got {len(values)}")
        return cls(*values)


def _transform(theta: GkParams, z: np.ndarray) -> np.ndarray:
    # (1 - exp(-gz)) / (1 + exp(-gz)) == tanh(gz / 2), without overflow
    skew = 1.0 + GK_C * np.tanh(theta.g * z / 2.0)
    return theta.a + theta.b * skew * (1.0 + z ** 2) ** theta.kappa * z


def gk_quantile(theta: GkParams, r: "_ARRAY") -> np.ndarray:
    """Evaluate the g-and-kappa quantile function at positions r in (0, 1).

    Examples
    --------
    >>> float(gk_quantile(GkParams(3, 1, 2, 0.5), 0.5))
    3.0
    """
    r = np.asarray(r, dtype=np.float64)
    if np.any((r <= 0) | (r >= 1)):
        raise ContractError("quantile positions must lie in (0, 1)")
    return _transform(theta, norm.ppf(r))


def gk_sample(theta: GkParams, n: int, rng: "_RNG" = None) -> np.ndarray:
    """Draw n i.i.d. samples by pushing standard normals through the formula.

    Parameters
    ----------
    theta: GkParams
        distribution parameters
    n: int
        number of samples
    rng: _RNG
        seed or generator

    Returns
    -------
    np.ndarray
        vector of n samples
    """
    if n < 1:
        raise ContractError(f"sample count must be >= 1, got {n}")
    return _transform(theta, as_generator(rng).standard_normal(n))


def gen_gk_episode(theta: GkParams, n_context: int, n_target: int,
                   rng: "_RNG" = None) -> TaskBatch:
    """Episode over quantile positions.

    The first n_context rows are samples ``s = Q(z)`` paired with their
    generating positions ``r = Phi(z)``, they form the context. The remaining
    n_target rows hold fresh uniform positions and the exact quantiles.

    Raises
    ------
    ContractError
        if either count is smaller than one
    """
    if n_context < 1 or n_target < 1:
        raise ContractError(f"counts must be >= 1, got context={n_context} "
                            f"target={n_target}")
    gen = as_generator(rng)
    z = gen.standard_normal(n_context)
    r_target = gen.uniform(_R_LOW, 1.0, size=n_target)

    x = np.concatenate([norm.cdf(z), r_target]).reshape(-1, 1)
    y = np.concatenate([_transform(theta, z),
                        gk_quantile(theta, r_target)]).reshape(-1, 1)
    return TaskBatch(x, y, np.arange(n_context))


def normal_scores(r: "_ARRAY") -> np.ndarray:
    """Map quantile positions to standard normal scores, the model input.

    Positions are clipped to ``[eps, 1 - eps]`` so the scores stay finite.

    Examples
    --------
    >>> float(normal_scores(0.5))
    0.0
    """
    r = np.clip(np.asarray(r, dtype=np.float64), _R_LOW, 1.0 - _R_LOW)
    return norm.ppf(r)


class GkTask(TaskABC):
    """Learn the quantile function of a fixed g-and-kappa distribution."""

    name = "gk"
    fixed_context = False

    def __init__(self, config) -> None:
        super().__init__(config)
        self.theta = GkParams.from_sequence(config.theta)

    @property
    def d_x(self) -> int:
        return 1

    @property
    def d_y(self) -> int:
        return 1

    def episode(self, rng: "_RNG") -> TaskBatch:
        """Episode with inputs already on the normal-score scale."""
        batch = gen_gk_episode(self.theta, self.config.n_context,
                               self.config.n_points, rng)
        return TaskBatch(normal_scores(batch.x_target), batch.y_target,
                         batch.context_idx)

    def model_samples(self, params: "ModelParams", context: TaskBatch,
                      n: int, rng: "_RNG") -> np.ndarray:
        """Decode uniform quantile positions into n model samples."""
        r = as_generator(rng).uniform(_R_LOW, 1.0, size=(n, 1))
        return predict(params, context.x_context, context.y_context,
                       normal_scores(r)).numpy().reshape(-1)

    def evaluate(self, params: "ModelParams") -> Dict[str, float]:
        """Rooted 1D Wasserstein between model and true samples.

        ``noise_floor`` is the same distance between two independent true
        sample sets of equal size.
        """
        gen = np.random.default_rng(self.config.seed + HOLDOUT_OFFSET)
        n, p = self.config.n_eval, self.config.p
        context = self.episode(gen)
        model = self.model_samples(params, context, n, gen)
        true = gk_sample(self.theta, n, gen)
        floor = gk_sample(self.theta, n, gen)
        return {
            "metric": wasserstein_1d_pow(model, true, p).item() ** (1 / p),
            "noise_floor":
                wasserstein_1d_pow(floor, true, p).item() ** (1 / p),
        }

    def eval_table(self, params: "ModelParams", n: int, rng: "_RNG"
                   ) -> Tuple[List[str], np.ndarray]:
        """Two sample columns, ``model`` and ``true``."""
        gen = as_generator(rng)
        model = self.model_samples(params, self.episode(gen), n, gen)
        true = gk_sample(self.theta, n, gen)
        return ["model", "true"], np.column_stack([model, true])

    def write_artifacts(self, params: "ModelParams", output_dir: "_PATH"
                        ) -> List[Path]:
        output_dir = Path(output_dir)
        seed = self.config.seed + HOLDOUT_OFFSET
        columns, table = self.eval_table(params, self.config.n_eval, seed)
        samples = output_dir / "samples.csv"
        np.savetxt(samples, table, fmt="%.10g", delimiter=",",
                   header=",".join(columns), comments="")

        r = np.linspace(0.01, 0.99, 99).reshape(-1, 1)
        context = self.episode(np.random.default_rng(seed))
        q_model = predict(params, context.x_context, context.y_context,
                          normal_scores(r)).numpy()
        quantiles = output_dir / "quantiles.csv"
        np.savetxt(quantiles,
                   np.hstack([r, gk_quantile(self.theta, r), q_model]),
                   fmt="%.10g", delimiter=",", header="r,q_true,q_model",
                   comments="")
        return [samples, quantiles]

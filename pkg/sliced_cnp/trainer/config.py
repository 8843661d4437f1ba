"""Run configuration with per-task defaults and layered sources.

Values are resolved as built-in task defaults, then a flat ``key = value``
file, then explicit overrides such as command line flags.
"""

import logging
from dataclasses import asdict, dataclass, field, fields, replace
from typing import TYPE_CHECKING, Any, Callable, Dict, Optional, Tuple

from ..constants import DEFAULT_N_PROJ, DEFAULT_POWER, IMAGE_KINDS, TASKS
from ..exceptions import ConfigError
from ..losses import OBJECTIVES
from ..utils import config_parser
from .optim import lr_at

if TYPE_CHECKING:
    from ..typeshed import _PATH

__all__ = ["TrainConfig", "SCHEDULES", "OPTIMIZERS"]

log = logging.getLogger(__name__)

#: learning rate schedules
SCHEDULES = ("constant", "cyclic")
#: supported optimizers
OPTIMIZERS = ("adam", )

_TASK_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "uniform_regression": {},
    "gk": {"hidden": 128, "schedule": "cyclic", "epochs": 5000,
           "joint": False, "n_points": 200, "n_context": 50,
           "n_eval": 10_000},
    "tiles": {"hidden": 128, "epochs": 2000, "eval_every": 100,
              "checkpoint_every": 1000},
}

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


@dataclass(frozen=True)
class TrainConfig:
    """Everything needed to reproduce one training run.

    Parameters
    ----------
    task: str
        experiment name, one of :data:`~sliced_cnp.constants.TASKS`
    objective: str
        ``swd``, ``gaussian_nll`` or ``uniform_loglik``
    joint: bool
        sliced distance over joint (x, y) points instead of outputs only
    n_proj: int
        random directions per sliced distance
    p: float
        Wasserstein power, at least 1
    p0: float
        lower bound of the context fraction
    p1: float
        upper bound of the context fraction
    optimizer: str
        only ``adam``
    schedule: str
        ``constant`` uses lr_base, ``cyclic`` a triangular wave up to lr_max
    lr_base: float
        base learning rate
    lr_max: float
        peak learning rate of the cyclic schedule
    cycle_steps: int
        period of the cyclic schedule in optimizer steps
    epochs: int
        number of training steps, one episode each
    seed: int
        seeds model init, episodes and projections
    checkpoint_every: int
        write a checkpoint every this many steps
    hidden: int
        hidden width of encoder and decoder
    r_dim: int
        representation width
    halfwidth: float
        half width of the uniform noise tube
    eval_every: int
        run held-out evaluation every this many steps
    n_eval: int
        evaluation grid or sample size
    n_points: int
        target points per regression or g-and-kappa episode
    n_context: int
        context rows per g-and-kappa episode
    theta: Tuple[float, ...]
        g-and-kappa parameters (a, b, g, kappa)
    n_images: int
        synthetic training images of the tile task
    n_holdout: int
        held-out images of the tile task
    image_kind: str
        synthetic image family or ``mixed``
    channels: int
        1 or 3 image channels
    image_dir: Optional[str]
        directory of PGM/PPM images replacing the synthetic corpus
    limit: Optional[int]
        read at most this many images from image_dir
    timing: bool
        record step wall time, off keeps metrics files reproducible
    """

    task: str = "uniform_regression"
    objective: str = "swd"
    joint: bool = True
    n_proj: int = DEFAULT_N_PROJ
    p: float = DEFAULT_POWER
    p0: float = 0.05
    p1: float = 0.5
    optimizer: str = "adam"
    schedule: str = "constant"
    lr_base: float = 1e-3
    lr_max: float = 1e-2
    cycle_steps: int = 200
    epochs: int = 1000
    seed: int = 0
    checkpoint_every: int = 500
    hidden: int = 64
    r_dim: int = 32
    halfwidth: float = 1.0
    eval_every: int = 50
    n_eval: int = 200
    n_points: int = 500
    n_context: int = 50
    theta: Tuple[float, ...] = field(default=(3.0, 1.0, 2.0, 0.5))
    n_images: int = 200
    n_holdout: int = 20
    image_kind: str = "mixed"
    channels: int = 1
    image_dir: Optional[str] = None
    limit: Optional[int] = None
    timing: bool = False

    @classmethod
    def for_task(cls, task: str, **overrides: Any) -> "TrainConfig":
        """Built-in defaults of a task, optionally overridden.

        Raises
        ------
        ConfigError
            if the task is unknown or an override key does not exist
        """
        if task not in _TASK_DEFAULTS:
            raise ConfigError("task", f"unknown task '{task}', valid: "
                                      f"{', '.join(TASKS)}")
        _check_keys(overrides)
        return cls(task=task, **{**_TASK_DEFAULTS[task], **overrides})

    @classmethod
    def from_sources(cls, task: Optional[str] = None,
                     config_file: Optional["_PATH"] = None,
                     **overrides: Any) -> "TrainConfig":
        """Resolve configuration from defaults, file and overrides.

        Parameters
        ----------
        task: Optional[str]
            task name, takes precedence over the file
        config_file: Optional[_PATH]
            flat ``key = value`` file
        **overrides: Any
            already typed values, None entries are ignored

        Returns
        -------
        TrainConfig
            validated configuration

        Raises
        ------
        ConfigError
            naming the offending key when anything is invalid
        """
        values: Dict[str, Any] = {}
        if config_file is not None:
            try:
                raw = config_parser(config_file)
            except FileNotFoundError:
                raise ConfigError("config", f"file {config_file} not found")
            values.update(coerce(raw))
        values.update({k: v for k, v in overrides.items() if v is not None})
        if task is not None:
            values["task"] = task

        name = values.pop("task", cls.task)
        config = cls.for_task(name, **values)
        config.validate()
        log.debug(f"resolved configuration: {config}")
        return config

    def replace(self, **changes: Any) -> "TrainConfig":
        """Copy with changed fields, not validated."""
        _check_keys(changes)
        return replace(self, **changes)

    @property
    def fixed_context(self) -> bool:
        """Tile episodes keep their own context, the rest resample it."""
        return self.task == "tiles"

    def lr(self, step: int) -> float:
        """Learning rate of an optimizer step under the configured schedule."""
        if self.schedule == "cyclic":
            return lr_at(step, self.lr_base, self.lr_max, self.cycle_steps)
        return self.lr_base

    def to_dict(self) -> Dict[str, Any]:
        """JSON serializable dictionary of all fields."""
        d = asdict(self)
        d["theta"] = list(self.theta)
        return d

    def validate(self):
        """Check every invariant.

        Raises
        ------
        ConfigError
            with the key of the first violated constraint
        """
        def require(key: str, ok: bool, message: str):
            if not ok:
                raise ConfigError(key, f"{message}, got {getattr(self, key)}")

        require("task", self.task in TASKS, f"must be one of {TASKS}")
        require("objective", self.objective in OBJECTIVES,
                f"must be one of {tuple(OBJECTIVES)}")
        require("optimizer", self.optimizer in OPTIMIZERS,
                f"must be one of {OPTIMIZERS}")
        require("schedule", self.schedule in SCHEDULES,
                f"must be one of {SCHEDULES}")
        require("p0", 0 < self.p0 <= 1, "must lie in (0, 1]")
        require("p1", self.p0 <= self.p1 <= 1, "must lie in [p0, 1]")
        require("p", self.p >= 1, "must be >= 1")
        require("lr_base", self.lr_base > 0, "must be positive")
        require("lr_max", self.lr_max >= self.lr_base, "must be >= lr_base")
        require("cycle_steps", self.cycle_steps >= 2, "must be >= 2")
        require("halfwidth", self.halfwidth > 0, "must be positive")
        for key in ("n_proj", "epochs", "checkpoint_every", "hidden", "r_dim",
                    "eval_every", "n_eval", "n_points", "n_context",
                    "n_images", "n_holdout"):
            require(key, getattr(self, key) >= 1, "must be >= 1")
        require("n_points", self.task != "uniform_regression" or
                self.n_points >= 2, "regression needs >= 2 points")
        require("theta", len(self.theta) == 4 and
                all(0 <= t <= 10 for t in self.theta),
                "needs 4 values within [0, 10]")
        require("image_kind", self.image_kind in IMAGE_KINDS + ("mixed", ),
                f"must be one of {IMAGE_KINDS + ('mixed', )}")
        require("channels", self.channels in (1, 3), "must be 1 or 3")
        require("limit", self.limit is None or self.limit >= 1,
                "must be >= 1")


def _check_keys(values: Dict[str, Any]):
    known = {f.name for f in fields(TrainConfig)}
    for key in values:
        if key not in known:
            raise ConfigError(key, "unknown configuration key")


def _to_bool(value: str) -> bool:
    if value.lower() in _TRUE:
        return True
    if value.lower() in _FALSE:
        return False
    raise ValueError(f"'{value}' is not a boolean")


def _to_floats(value: str) -> Tuple[float, ...]:
    parts = value.strip("()[] ").split(",")
    return tuple(float(v) for v in parts if v.strip())


def _optional(convert: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(value: str):
        if value.lower() in ("", "none", "null"):
            return None
        return convert(value)
    return parse


_PARSERS: Dict[Any, Callable[[str], Any]] = {
    bool: _to_bool,
    int: int,
    float: float,
    str: str,
    Tuple[float, ...]: _to_floats,
    Optional[str]: _optional(str),
    Optional[int]: _optional(int),
}


def coerce(raw: Dict[str, str]) -> Dict[str, Any]:
    """Convert raw string values to the types of the matching fields.

    Raises
    ------
    ConfigError
        if a key is unknown or its value does not parse
    """
    types = {f.name: f.type for f in fields(TrainConfig)}
    values = {}
    for key, value in raw.items():
        if key not in types:
            raise ConfigError(key, "unknown configuration key")
        try:
            values[key] = _PARSERS[types[key]](value)
        except ValueError as e:
            raise ConfigError(key, f"cannot parse '{value}': {e}")
    return values

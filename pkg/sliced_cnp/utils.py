"""Console and file helpers shared by the training loop and the CLI."""

import logging
from contextlib import contextmanager
from pathlib import Path
from time import perf_counter
from typing import TYPE_CHECKING, Any, Dict, Optional, Union

import numpy as np
from tqdm import tqdm

from .exceptions import ConfigError

if TYPE_CHECKING:
    from .typeshed import _PATH, _RNG

__all__ = ["ProgressBar", "lprint", "config_parser", "context_timeit",
           "as_generator", "seed_of"]

log = logging.getLogger(__name__)


class _SilentBar:
    """Stands in for the step bar when a run is quiet."""

    def __init__(self, **kwargs) -> None:  # NOSONAR
        self.n = 0

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False

    def update_bar(self, loss: Optional[float] = None,
                   metric: Optional[float] = None):
        self.n += 1


class _StepBar(tqdm):
    """tqdm bar that shows the latest loss and metric next to the count."""

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()
        return super().__exit__(exc_type, exc_value, traceback)

    def update_bar(self, loss: Optional[float] = None,
                   metric: Optional[float] = None):
        postfix = {k: f"{v:.4g}" for k, v in
                   (("loss", loss), ("metric", metric)) if v is not None}
        if postfix:
            self.set_postfix(postfix, refresh=False)
        self.update(1)


def ProgressBar(total: Optional[int] = None, unit: str = "step",  # NOSONAR
                ncols: int = 100, desc: Optional[str] = None,
                quiet: bool = True, **kwargs) -> Union[_SilentBar, _StepBar]:
    """Create step counter for a long loop.

    Parameters
    ----------
    total : Optional[int]
        expected number of updates
    unit : str
        what one update counts, by default 'step'
    ncols : int
        bar width in characters
    desc : Optional[str]
        label shown in front of the bar
    quiet : bool
        return a counter that prints nothing

    Returns
    -------
    Union[_SilentBar, _StepBar]
        both accept ``update_bar(loss, metric)`` and work as context managers
    """
    if quiet:
        return _SilentBar(total=total, **kwargs)
    return _StepBar(total=total, unit=unit, ncols=ncols, desc=desc, **kwargs)


class lprint:
    """Print that stays silent in quiet mode.

    Parameters
    ----------
    quiet: bool
        when true calls are ignored
    """

    def __init__(self, quiet: bool = False):
        self._quiet = quiet

    def __call__(self, text: Any):
        if not self._quiet:
            print(text)

def _parse_value(raw: str) -> str:
    value = raw.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def config_parser(config_path: "_PATH") -> Dict[str, str]:
    """Parses flat ``key = value`` configuration file.

    Blank lines and everything after ``#`` are ignored, values may be quoted.
    Values are returned as strings, type coercion is left to the consumer.

    Parameters
    ----------
    config_path : _PATH
        path to config file

    Returns
    -------
    Dict[str, str]
        parsed keys and raw values

    Raises
    ------
    ConfigError
        if a line is not a ``key = value`` pair or a key repeats
    FileNotFoundError
        if the file does not exist
    """
    config_path = Path(config_path).expanduser()

    config: Dict[str, str] = {}
    with config_path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(None, f"{config_path}:{lineno} expected "
                                        f"'key = value', got '{line}'")
            key, value = line.split("=", 1)
            key = key.strip().replace("-", "_")
            if not key:
                raise ConfigError(None, f"{config_path}:{lineno} empty key")
            if key in config:
                raise ConfigError(key, f"repeated in {config_path}")
            config[key] = _parse_value(value)

    log.debug(f"parsed {len(config)} keys from {config_path}")
    return config


@contextmanager
def context_timeit(quiet: bool = False, label: str = "Wall time"):
    """Print elapsed seconds of the enclosed block once it exits.

    Parameters
    ----------
    quiet : bool, optional
        suppress the report, by default False
    label : str, optional
        text printed in front of the elapsed time
    """
    start = perf_counter()
    try:
        yield
    finally:
        lprint(quiet)(f"{label}: {perf_counter() - start:.2f}s")


def as_generator(rng: "_RNG") -> np.random.Generator:
    """Turn seed or generator into numpy generator.

    Generators are passed through untouched so the caller's stream advances.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def seed_of(rng: "_RNG") -> Optional[int]:
    """Return integer seed when one was supplied, otherwise None."""
    if isinstance(rng, (int, np.integer)) and not isinstance(rng, bool):
        return int(rng)
    return None

"""Line buffered CSV logs for per-step metrics and evaluations."""

import logging
from pathlib import Path
from typing import IO, TYPE_CHECKING, Any, Optional, Sequence

import numpy as np

if TYPE_CHECKING:
    from ..typeshed import _PATH

__all__ = ["CsvLog", "METRIC_COLUMNS", "format_value"]

log = logging.getLogger(__name__)

#: header of the per-step metrics file
METRIC_COLUMNS = ("step", "lr", "loss", "metric", "degenerate", "wall_ms")


def format_value(value: Any) -> str:
    """Stable text form, floats keep 10 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10g}"
    return str(value)


class CsvLog:
    """CSV file written one complete row at a time.

    Every row is written with a single call and flushed, so a reader never
    sees a partial line.

    Parameters
    ----------
    path: _PATH
        file to create, an existing one is overwritten
    columns: Sequence[str]
        header names
    """

    def __init__(self, path: "_PATH", columns: Sequence[str]) -> None:
        self.path = Path(path)
        self.columns = tuple(columns)
        self._file: Optional[IO[str]] = None

    def __enter__(self) -> "CsvLog":
        self._file = self.path.open("w", encoding="utf-8", newline="")
        self._file.write(",".join(self.columns) + "\n")
        self._file.flush()
        return self

    def __exit__(self, *args):
        if self._file is not None:
            self._file.close()
            self._file = None

    def append(self, *values: Any):
        """Write one row, value count must equal the column count."""
        if self._file is None:
            raise RuntimeError(f"{self.path} is not open")
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got "
                             f"{len(values)}")
        self._file.write(",".join(format_value(v) for v in values) + "\n")
        self._file.flush()

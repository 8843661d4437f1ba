"""Module defining exceptions for sliced-cnp."""

import logging
from typing import Optional

__all__ = ["SlicedCNPError", "ShapeError", "ContractError", "ConfigError",
           "CheckpointError", "NumericalError", "ImageFormatError"]

logging.getLogger(__name__)


class SlicedCNPError(Exception):
    """Base for all errors raised by the package."""

    pass


class ShapeError(SlicedCNPError, ValueError):
    """Raised when tensor shapes do not agree."""

    pass


class ContractError(SlicedCNPError, ValueError):
    """Raised when an operation precondition is violated."""

    pass


class ConfigError(SlicedCNPError, ValueError):
    """Raised when configuration value is missing or invalid.

    Parameters
    ----------
    key: Optional[str]
        name of the offending configuration key
    message: str
        human readable description
    """

    def __init__(self, key: Optional[str], message: str) -> None:
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class CheckpointError(SlicedCNPError):
    """Raised when checkpoint cannot be read or does not fit the model."""

    pass


class NumericalError(SlicedCNPError, ArithmeticError):
    """Raised when parameters or gradients stop being finite."""

    pass


class ImageFormatError(SlicedCNPError):
    """Raised when PPM/PGM image file could not be parsed."""

    pass

"""Template module for all task classes."""

from ._task import TaskABC

__all__ = ["TaskABC"]

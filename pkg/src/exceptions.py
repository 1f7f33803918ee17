"""
Error hierarchy for the fusion toolkit.

Components raise these and let them propagate; the CLI maps them to exit codes.
"""

from pathlib import Path
from typing import Optional, Union


class FusionToolError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(FusionToolError, ValueError):
    """Invalid scenario or application configuration."""

    def __init__(
        self,
        message: str,
        path: Optional[Union[str, Path]] = None,
        line: Optional[int] = None
    ):
        self.message = message
        self.path = str(path) if path is not None else None
        self.line = line
        super().__init__(self._render())

    def _render(self) -> str:
        if self.path and self.line:
            return f"{self.path}:{self.line}: {self.message}"
        if self.path:
            return f"{self.path}: {self.message}"
        if self.line:
            return f"line {self.line}: {self.message}"
        return self.message


class CalibrationError(FusionToolError, ValueError):
    """Sigmoid calibration requested with a confirmation threshold not above s0."""


class TotalConflictError(FusionToolError, ArithmeticError):
    """Dempster combination of two fully conflicting masses (K = 1)."""


class MapError(FusionToolError, ValueError):
    """Digital map cannot answer the query (e.g. it has no road cells)."""


class InsufficientDataError(FusionToolError, ValueError):
    """Not enough samples, sensors or intervals for a statistic."""


class RecordingFormatError(FusionToolError, ValueError):
    """Recording file is truncated, corrupt or of an unknown schema version."""

"""
Base storage interface.

This module defines the abstract base class for the tabular and document
output writers. Every writer goes through a temporary file that replaces the
target only once it is complete, so a failed run leaves no partial output.
"""

import logging
import os
from abc import ABC, abstractmethod
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Any, Dict, Iterator, Optional

from src.exceptions import RecordingFormatError

logger = logging.getLogger(__name__)

OUTPUT_SCHEMA_VERSION = 1


@contextmanager
def atomic_write(path: Path, mode: str = 'w', encoding: Optional[str] = 'utf-8', newline: Optional[str] = None) -> Iterator[IO]:
    """
    Open a temporary sibling of path for writing; it replaces path on success.

    Args:
        path: Final file location
        mode: 'w' for text, 'wb' for binary
        encoding: Text encoding (ignored for binary)
        newline: Passed through for text mode
    """
    path = Path(path)
    temp_file = path.with_name(path.name + '.tmp')
    kwargs: Dict[str, Any] = {}
    if 'b' not in mode:
        kwargs = {'encoding': encoding, 'newline': newline}
    try:
        with open(temp_file, mode, **kwargs) as f:
            yield f
        os.replace(temp_file, path)
    except BaseException:
        if temp_file.exists():
            temp_file.unlink()
        raise


def check_schema_version(version: Any, source: Path) -> None:
    """Reject output files written by an unknown schema version."""
    try:
        value = int(version)
    except (TypeError, ValueError):
        raise RecordingFormatError(f"{source}: missing or invalid schema_version {version!r}") from None
    if value != OUTPUT_SCHEMA_VERSION:
        raise RecordingFormatError(
            f"{source}: unsupported schema_version {value}, expected {OUTPUT_SCHEMA_VERSION}"
        )


class BaseStorage(ABC):
    """
    Abstract base class for storage implementations.

    All storage backends must implement this interface.
    """

    def __init__(self, output_dir: Path, config: Optional[Dict[str, Any]] = None):
        """
        Initialize storage backend.

        Args:
            output_dir: Directory for output files
            config: Backend section of the application config
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.config = config or {}
        self.file_path: Optional[Path] = None

    @abstractmethod
    def save(self, data: Any, filename: Optional[str] = None) -> Path:
        """
        Save data to storage.

        Args:
            data: Content to save
            filename: Optional custom filename

        Returns:
            Path to the saved file
        """

    def get_file_path(self, filename: Optional[str] = None) -> Path:
        """
        Get full file path for output.

        Args:
            filename: Optional filename; the configured default otherwise
        """
        if filename:
            return self.output_dir / filename
        if self.file_path:
            return self.file_path
        return self.output_dir / self.config.get('filename', self.default_filename)

    @property
    def default_filename(self) -> str:
        return 'output.dat'

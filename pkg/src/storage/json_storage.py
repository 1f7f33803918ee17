"""
JSON storage implementation.

Structured documents (diagnosis reports, manifests) and JSON-lines streams
(recording dumps).
"""

import json
import logging
import sys
from pathlib import Path
from typing import IO, Any, Dict, Iterable, Optional

from src.exceptions import RecordingFormatError
from src.storage.base import OUTPUT_SCHEMA_VERSION, BaseStorage, atomic_write, check_schema_version

logger = logging.getLogger(__name__)


class JSONStorage(BaseStorage):
    """
    JSON document storage.

    Keys are sorted so equal documents give byte-identical files.
    """

    def __init__(self, output_dir: Path, config: Optional[Dict[str, Any]] = None):
        super().__init__(output_dir, config)
        self.indent = self.config.get('indent', 2)
        self.ensure_ascii = self.config.get('ensure_ascii', False)

    @property
    def default_filename(self) -> str:
        return 'report.json'

    def dumps(self, data: Dict[str, Any]) -> str:
        document = {'schema_version': OUTPUT_SCHEMA_VERSION, **data}
        return json.dumps(document, indent=self.indent, ensure_ascii=self.ensure_ascii, sort_keys=True) + '\n'

    def save(self, data: Dict[str, Any], filename: Optional[str] = None) -> Path:
        """
        Save a document, stamped with the output schema version.

        Args:
            data: Document to save
            filename: Optional custom filename

        Returns:
            Path to the saved file
        """
        file_path = self.get_file_path(filename)

        try:
            text = self.dumps(data)
            with atomic_write(file_path, 'w', encoding='utf-8') as f:
                f.write(text)

            logger.info(f"Saved document to {file_path}")
            self.file_path = file_path
            return file_path

        except Exception as e:
            logger.error(f"Failed to save JSON file: {e}")
            raise

    def load(self, file_path: Path) -> Dict[str, Any]:
        """
        Load a document written by save.

        Raises:
            RecordingFormatError: Not an object, or unknown schema version
        """
        file_path = Path(file_path)
        with open(file_path, 'r', encoding='utf-8') as f:
            data = json.load(f)

        if not isinstance(data, dict):
            raise RecordingFormatError(f"{file_path}: expected a JSON object, got {type(data).__name__}")
        check_schema_version(data.get('schema_version'), file_path)
        logger.debug(f"Loaded document from {file_path}")
        return data


class JSONLinesStorage(BaseStorage):
    """
    JSON Lines storage backend.

    One JSON object per line; suited to streaming frame dumps.
    """

    def __init__(self, output_dir: Path, config: Optional[Dict[str, Any]] = None):
        super().__init__(output_dir, config)
        self.ensure_ascii = self.config.get('ensure_ascii', False)

    @property
    def default_filename(self) -> str:
        return 'dump.jsonl'

    def write_stream(self, items: Iterable[Dict[str, Any]], stream: IO[str]) -> int:
        """Write items to an open text stream; returns the number of lines."""
        count = 0
        for item in items:
            stream.write(json.dumps(item, ensure_ascii=self.ensure_ascii, sort_keys=True) + '\n')
            count += 1
        return count

    def save(self, data: Iterable[Dict[str, Any]], filename: Optional[str] = None) -> Path:
        """
        Save items to a JSON Lines file.

        Args:
            data: Items to save, consumed lazily
            filename: Optional custom filename

        Returns:
            Path to the saved file
        """
        file_path = self.get_file_path(filename)

        try:
            with atomic_write(file_path, 'w', encoding='utf-8') as f:
                count = self.write_stream(data, f)

            logger.info(f"Saved {count} lines to {file_path}")
            self.file_path = file_path
            return file_path

        except Exception as e:
            logger.error(f"Failed to save JSON Lines file: {e}")
            raise

    def write_stdout(self, data: Iterable[Dict[str, Any]]) -> int:
        return self.write_stream(data, sys.stdout)

"""
CSV storage implementation.

Plot-ready metric tables: one row per (interval, sensor or bin, metric).
"""

import csv
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.storage.base import OUTPUT_SCHEMA_VERSION, BaseStorage, atomic_write

logger = logging.getLogger(__name__)

METRIC_COLUMNS = [
    'schema_version',
    'interval',
    'sensor_id',
    'bin_id',
    'metric',
    'mean',
    'ci_low',
    'ci_high',
    'samples',
]


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class CSVStorage(BaseStorage):
    """
    CSV storage backend for metric tables.

    Rows are dicts keyed by METRIC_COLUMNS; missing keys stay empty. Floats
    are written with repr so a reader gets the exact value back.
    """

    def __init__(self, output_dir: Path, config: Optional[Dict[str, Any]] = None):
        super().__init__(output_dir, config)
        self.encoding = self.config.get('encoding', 'utf-8')
        self.delimiter = self.config.get('delimiter', ',')
        self.fieldnames: List[str] = list(METRIC_COLUMNS)

    @property
    def default_filename(self) -> str:
        return 'metrics.csv'

    def save(self, data: List[Dict[str, Any]], filename: Optional[str] = None) -> Path:
        """
        Save rows to a CSV file with a header row.

        Args:
            data: Metric rows
            filename: Optional custom filename

        Returns:
            Path to the saved file
        """
        file_path = self.get_file_path(filename)

        try:
            with atomic_write(file_path, 'w', encoding=self.encoding, newline='') as f:
                writer = csv.DictWriter(
                    f,
                    fieldnames=self.fieldnames,
                    delimiter=self.delimiter,
                    extrasaction='ignore',
                    lineterminator='\n'
                )
                writer.writeheader()
                for row in data:
                    values = {'schema_version': OUTPUT_SCHEMA_VERSION, **row}
                    writer.writerow({key: _format(values.get(key)) for key in self.fieldnames})

            logger.info(f"Saved {len(data)} metric rows to {file_path}")
            self.file_path = file_path
            return file_path

        except Exception as e:
            logger.error(f"Failed to save CSV file: {e}")
            raise

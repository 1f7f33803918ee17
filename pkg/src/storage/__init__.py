"""Storage layer: metric tables, report documents and binary run recordings."""

from .base import OUTPUT_SCHEMA_VERSION, BaseStorage, atomic_write
from .csv_storage import METRIC_COLUMNS, CSVStorage
from .json_storage import JSONLinesStorage, JSONStorage
from .recording import RecordingWriter, dump_records, read_recording

__all__ = [
    "OUTPUT_SCHEMA_VERSION",
    "METRIC_COLUMNS",
    "BaseStorage",
    "CSVStorage",
    "JSONLinesStorage",
    "JSONStorage",
    "RecordingWriter",
    "atomic_write",
    "dump_records",
    "read_recording",
]

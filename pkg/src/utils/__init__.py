"""Utility modules for the fusion toolkit."""

from .assignment import AssignmentResult, gated_assignment
from .hashing import canonical_json, config_hash, file_digest
from .logger import RunLogger, setup_logger

__all__ = [
    "AssignmentResult",
    "RunLogger",
    "canonical_json",
    "config_hash",
    "file_digest",
    "gated_assignment",
    "setup_logger",
]

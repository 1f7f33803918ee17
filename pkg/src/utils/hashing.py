"""
Content hashing for reproducibility audits.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Union


def canonical_json(data: Any) -> str:
    """Key-sorted compact JSON; equal content gives equal text."""
    return json.dumps(data, sort_keys=True, separators=(',', ':'), ensure_ascii=True)


def config_hash(data: Any) -> str:
    """SHA-256 of the canonical JSON form of a configuration document."""
    return hashlib.sha256(canonical_json(data).encode('utf-8')).hexdigest()


def file_digest(path: Union[str, Path], chunk_size: int = 1 << 20) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(chunk_size), b''):
            digest.update(chunk)
    return digest.hexdigest()

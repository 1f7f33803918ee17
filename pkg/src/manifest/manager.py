"""
Run manifest management.

A manifest binds every output file of a run to the configuration hash, seed
and tool version that produced it, so a run can be audited and reproduced.
"""

import logging
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from src import __version__
from src.storage.base import OUTPUT_SCHEMA_VERSION
from src.storage.json_storage import JSONStorage
from src.utils.hashing import file_digest

logger = logging.getLogger(__name__)


class RunState(str, Enum):
    """Possible states of a run."""
    INITIALIZED = "initialized"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class OutputEntry(BaseModel):
    name: str
    kind: str
    sha256: str
    size_bytes: int


class RunManifest(BaseModel):
    """Reproducibility record of one run."""

    schema_version: int = OUTPUT_SCHEMA_VERSION
    command: str
    scenario: Optional[str] = None
    config_hash: Optional[str] = None
    seed: Optional[int] = None
    tool_version: str = __version__
    state: RunState = RunState.INITIALIZED
    timing: Dict[str, Any] = Field(default_factory=dict)
    outputs: List[OutputEntry] = Field(default_factory=list)
    statistics: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[str] = None


class ManifestManager:
    """
    Tracks a run's lifecycle and output inventory and writes the manifest.

    Args:
        output_dir: Directory holding the run's outputs
        filename: Manifest file name
    """

    def __init__(self, output_dir: Path, filename: str = "manifest.json", config: Optional[Dict[str, Any]] = None):
        self.output_dir = Path(output_dir)
        self.filename = filename
        self.storage = JSONStorage(self.output_dir, config)
        self.manifest: Optional[RunManifest] = None

    @property
    def manifest_file(self) -> Path:
        return self.output_dir / self.filename

    def start_run(
        self,
        command: str,
        scenario: Optional[str] = None,
        config_hash: Optional[str] = None,
        seed: Optional[int] = None
    ) -> RunManifest:
        """Begin a new manifest; nothing is written until save()."""
        self.manifest = RunManifest(
            command=command,
            scenario=scenario,
            config_hash=config_hash,
            seed=seed,
            state=RunState.RUNNING,
            timing={"start_time": datetime.now().isoformat()},
        )
        logger.info(f"Started {command} run" + (f" of '{scenario}'" if scenario else ""))
        return self.manifest

    def _require(self) -> RunManifest:
        if self.manifest is None:
            raise RuntimeError("no run started")
        return self.manifest

    def register_output(self, path: Path, kind: str) -> OutputEntry:
        """
        Add a finished output file to the inventory.

        Args:
            path: File inside the output directory
            kind: Output kind (recording, metrics, report, dump)
        """
        manifest = self._require()
        path = Path(path)
        try:
            name = str(path.relative_to(self.output_dir))
        except ValueError:
            name = str(path)
        entry = OutputEntry(name=name, kind=kind, sha256=file_digest(path), size_bytes=path.stat().st_size)
        manifest.outputs = [o for o in manifest.outputs if o.name != name] + [entry]
        logger.debug(f"Registered output {name} ({kind})")
        return entry

    def update_statistics(self, stats: Dict[str, Any]) -> None:
        self._require().statistics.update(stats)

    def complete_run(self, success: bool = True, error: Optional[str] = None) -> Path:
        """Close the run and write the manifest."""
        manifest = self._require()
        manifest.state = RunState.COMPLETED if success else RunState.FAILED
        manifest.error = error
        end = datetime.now()
        manifest.timing["end_time"] = end.isoformat()
        if "start_time" in manifest.timing:
            start = datetime.fromisoformat(manifest.timing["start_time"])
            manifest.timing["duration_seconds"] = (end - start).total_seconds()

        path = self.save()
        logger.info(
            f"Run {'completed' if success else 'failed'}: {len(manifest.outputs)} outputs, manifest {path}"
        )
        return path

    def save(self) -> Path:
        return self.storage.save(self._require().model_dump(mode='json'), self.filename)

    def load(self, path: Optional[Path] = None) -> RunManifest:
        """Read a manifest back, rejecting unknown schema versions."""
        data = self.storage.load(path or self.manifest_file)
        self.manifest = RunManifest.model_validate(data)
        return self.manifest

    def verify(self) -> List[str]:
        """Names of inventoried outputs that are missing or whose digest changed."""
        manifest = self._require()
        stale = []
        for entry in manifest.outputs:
            path = self.output_dir / entry.name
            if not path.exists() or file_digest(path) != entry.sha256:
                stale.append(entry.name)
        return stale

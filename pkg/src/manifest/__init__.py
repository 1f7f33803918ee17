"""Run manifests binding outputs to their inputs."""

from .manager import ManifestManager, OutputEntry, RunManifest, RunState

__all__ = ["ManifestManager", "OutputEntry", "RunManifest", "RunState"]

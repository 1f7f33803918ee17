"""
Fusion pipeline types: clusters, fused estimates, configuration and run state.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.schema import BeliefMass, Dimensions, LocalObject, StateVector, SystemObject, TrackStatus
from src.plausibility.limits import ValueLimits


class FusedEstimate(BaseModel):
    """Merged kinematic state of a cluster."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    state: StateVector
    covariance: np.ndarray
    dims: Dimensions
    status: TrackStatus


class TrackCluster(BaseModel):
    """Local objects believed to describe one physical object, at most one per sensor."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    members: Tuple[LocalObject, ...]
    estimate: FusedEstimate

    @model_validator(mode='after')
    def check_members(self) -> "TrackCluster":
        if not self.members:
            raise ValueError("cluster must not be empty")
        sensor_ids = [m.sensor_id for m in self.members]
        if len(set(sensor_ids)) != len(sensor_ids):
            raise ValueError(f"cluster holds two tracks of one sensor: {sensor_ids}")
        timestamps = {m.timestamp for m in self.members}
        if len(timestamps) != 1:
            raise ValueError("cluster members must share a timestamp")
        return self

    @property
    def sensor_ids(self) -> frozenset:
        return frozenset(m.sensor_id for m in self.members)

    def member_for(self, sensor_id: int) -> Optional[LocalObject]:
        for member in self.members:
            if member.sensor_id == sensor_id:
                return member
        return None


class FusionConfig(BaseModel):
    """Fusion and association parameters."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    cluster_gate_probability: float = Field(0.99, gt=0, lt=1, description="Chi-square gate of the T2T distance")
    frame_gate: float = Field(5.0, gt=0, description="Cross-frame association gate (m)")
    smoothing: float = Field(0.5, gt=0, le=1, description="EMA weight of the current frame")
    smooth_existence: bool = False
    limits: ValueLimits = Field(default_factory=ValueLimits)


@dataclass
class FusionState:
    """State carried by the fusion pipeline across steps."""

    previous: List[SystemObject] = field(default_factory=list)
    next_global_id: int = 1
    history: Dict[int, float] = field(default_factory=dict)
    masses: Dict[int, BeliefMass] = field(default_factory=dict)
    diagnostics: List[str] = field(default_factory=list)

    def allocate_id(self) -> int:
        global_id = self.next_global_id
        self.next_global_id += 1
        return global_id

    def drain_diagnostics(self) -> List[str]:
        messages, self.diagnostics = self.diagnostics, []
        return messages

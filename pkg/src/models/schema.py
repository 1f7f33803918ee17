"""
Data schemas for the object-level fusion model.

This module defines the Pydantic value types shared by the tracker, the fusion
pipeline, the simulator and the analysis layer: local and fused objects, belief
masses, detections and the per-step observation ledger.
"""

import math
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

COVARIANCE_TOLERANCE = 1e-9
MASS_TOLERANCE = 1e-12


def normalize_angle(angle: float) -> float:
    """Wrap an angle in radians to [-pi, pi)."""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def validate_covariance(value, dim: int) -> np.ndarray:
    """
    Coerce a value to a read-only symmetric positive-semidefinite matrix.

    Args:
        value: Array-like matrix
        dim: Expected dimension

    Returns:
        Validated float matrix

    Raises:
        ValueError: Wrong shape, asymmetric or indefinite matrix
    """
    matrix = np.array(value, dtype=float)
    if matrix.shape != (dim, dim):
        raise ValueError(f"covariance must be {dim}x{dim}, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("covariance must be finite")
    if not np.allclose(matrix, matrix.T, rtol=0.0, atol=COVARIANCE_TOLERANCE):
        raise ValueError("covariance must be symmetric")
    if np.linalg.eigvalsh(matrix).min() < -COVARIANCE_TOLERANCE:
        raise ValueError("covariance must be positive semidefinite")
    matrix.setflags(write=False)
    return matrix


class ObjectClass(str, Enum):
    """Ground-truth object classes."""
    CAR = "car"
    TRUCK = "truck"
    BUS = "bus"
    CYCLIST = "cyclist"
    PEDESTRIAN = "pedestrian"


class StateVector(BaseModel):
    """Kinematic state (x, y, z, vx, vy, vz) in the global frame."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    x: float = Field(..., description="Position east (m)")
    y: float = Field(..., description="Position north (m)")
    z: float = Field(..., description="Position up (m)")
    vx: float = Field(0.0, description="Velocity east (m/s)")
    vy: float = Field(0.0, description="Velocity north (m/s)")
    vz: float = Field(0.0, description="Velocity up (m/s)")

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.vz])

    @property
    def speed(self) -> float:
        return math.sqrt(self.vx ** 2 + self.vy ** 2 + self.vz ** 2)

    def to_array(self) -> np.ndarray:
        """Return the state as a 6-vector."""
        return np.array([self.x, self.y, self.z, self.vx, self.vy, self.vz])

    @classmethod
    def from_array(cls, values) -> "StateVector":
        """Build a state from any 6-element sequence."""
        x, y, z, vx, vy, vz = (float(v) for v in values)
        return cls(x=x, y=y, z=z, vx=vx, vy=vy, vz=vz)


class Dimensions(BaseModel):
    """Box extent (L, W, H) and heading h."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    length: float = Field(..., gt=0, description="Length along heading (m)")
    width: float = Field(..., gt=0, description="Width (m)")
    height: float = Field(..., gt=0, description="Height (m)")
    heading: float = Field(0.0, description="Heading in radians, normalized to [-pi, pi)")

    @field_validator('heading')
    @classmethod
    def wrap_heading(cls, v: float) -> float:
        """Normalize heading to the half-open interval."""
        return normalize_angle(v)

    @property
    def half_extents(self) -> np.ndarray:
        return np.array([self.length, self.width, self.height]) / 2.0


class TrackStatus(BaseModel):
    """Track management status of an object."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    score: float = Field(..., description="Log-likelihood ratio track score")
    confirmed: bool = Field(False, description="Track reached the confirmation threshold")
    coasting: bool = Field(False, description="No measurement update this step")


class LocalObject(BaseModel):
    """One sensor's tracked object."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sensor_id: int = Field(..., ge=0)
    track_id: int = Field(..., ge=0)
    timestamp: float
    state: StateVector
    covariance: np.ndarray = Field(..., description="6x6 state covariance (SI units)")
    dims: Dimensions
    status: TrackStatus

    @field_validator('covariance', mode='before')
    @classmethod
    def check_covariance(cls, v) -> np.ndarray:
        return validate_covariance(v, 6)

    @property
    def key(self) -> Tuple[int, int]:
        return self.sensor_id, self.track_id


class LocalObjectList(BaseModel):
    """All sensors' local objects for one synchronous time step."""

    timestamp: float
    objects: Dict[int, List[LocalObject]] = Field(default_factory=dict)

    @model_validator(mode='after')
    def check_consistency(self) -> "LocalObjectList":
        seen = set()
        for sensor_id, objects in self.objects.items():
            for obj in objects:
                if obj.sensor_id != sensor_id:
                    raise ValueError(
                        f"object of sensor {obj.sensor_id} filed under sensor {sensor_id}"
                    )
                if abs(obj.timestamp - self.timestamp) > 1e-9:
                    raise ValueError(
                        f"object timestamp {obj.timestamp} differs from list timestamp {self.timestamp}"
                    )
                if obj.key in seen:
                    raise ValueError(f"duplicate local object {obj.key}")
                seen.add(obj.key)
        return self

    def all_objects(self) -> List[LocalObject]:
        """Return every object ordered by (sensor_id, track_id)."""
        flat = [obj for objects in self.objects.values() for obj in objects]
        return sorted(flat, key=lambda o: o.key)

    def for_sensor(self, sensor_id: int) -> List[LocalObject]:
        return sorted(self.objects.get(sensor_id, []), key=lambda o: o.track_id)

    def __len__(self) -> int:
        return sum(len(objects) for objects in self.objects.values())


class BeliefMass(BaseModel):
    """Dempster-Shafer mass over {exists, not exists, unknown}."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    m_exists: float = Field(..., ge=0.0, le=1.0)
    m_not_exists: float = Field(..., ge=0.0, le=1.0)
    m_unknown: float = Field(..., ge=0.0, le=1.0)

    @model_validator(mode='before')
    @classmethod
    def absorb_rounding(cls, data):
        # Products and differences of valid masses leave residue of order 1e-16
        if isinstance(data, dict):
            cleaned = dict(data)
            for name in ('m_exists', 'm_not_exists', 'm_unknown'):
                value = cleaned.get(name)
                if isinstance(value, (int, float)):
                    if -MASS_TOLERANCE <= value < 0.0:
                        cleaned[name] = 0.0
                    elif 1.0 < value <= 1.0 + MASS_TOLERANCE:
                        cleaned[name] = 1.0
            return cleaned
        return data

    @model_validator(mode='after')
    def check_sum(self) -> "BeliefMass":
        total = self.m_exists + self.m_not_exists + self.m_unknown
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise ValueError(f"belief masses must sum to 1, got {total!r}")
        return self

    @classmethod
    def vacuous(cls) -> "BeliefMass":
        """Full ignorance: all mass on the frame."""
        return cls(m_exists=0.0, m_not_exists=0.0, m_unknown=1.0)

    @classmethod
    def from_array(cls, values) -> "BeliefMass":
        m_exists, m_not_exists, m_unknown = (float(v) for v in values)
        return cls(m_exists=m_exists, m_not_exists=m_not_exists, m_unknown=m_unknown)

    def to_array(self) -> np.ndarray:
        return np.array([self.m_exists, self.m_not_exists, self.m_unknown])

    @property
    def is_vacuous(self) -> bool:
        return self.m_unknown == 1.0


class SystemObject(BaseModel):
    """Fused global object with existence probability and its uncertainty."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    global_id: int = Field(..., description="Persistent id; -1 before frame association")
    timestamp: float
    state: StateVector
    covariance: np.ndarray
    dims: Dimensions
    status: TrackStatus
    p_exists: float = Field(..., ge=0.0, le=1.0)
    s_exists: float = Field(..., ge=0.0, le=0.5)
    contributors: FrozenSet[int] = Field(default_factory=frozenset)
    mass: BeliefMass = Field(default_factory=BeliefMass.vacuous)

    @field_validator('covariance', mode='before')
    @classmethod
    def check_covariance(cls, v) -> np.ndarray:
        return validate_covariance(v, 6)

    @model_validator(mode='after')
    def check_existence_bounds(self) -> "SystemObject":
        if self.p_exists - self.s_exists < -MASS_TOLERANCE:
            raise ValueError("p_exists - s_exists must be >= 0")
        if self.p_exists + self.s_exists > 1.0 + MASS_TOLERANCE:
            raise ValueError("p_exists + s_exists must be <= 1")
        return self


class Detection(BaseModel):
    """Single sensor measurement, expressed in the sensor frame."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, allow_inf_nan=False)

    sensor_id: int = Field(..., ge=0)
    timestamp: float
    position: Tuple[float, float, float] = Field(..., description="Measured position, sensor frame (m)")
    radial_velocity: Optional[float] = Field(None, description="Measured range rate (m/s), radar only")
    noise: np.ndarray = Field(..., description="Measurement noise covariance")
    extent: Optional[Dimensions] = Field(None, description="Extent estimate, heading in sensor frame")

    @model_validator(mode='after')
    def check_noise(self) -> "Detection":
        dim = 4 if self.radial_velocity is not None else 3
        object.__setattr__(self, 'noise', validate_covariance(self.noise, dim))
        return self

    @property
    def measurement(self) -> np.ndarray:
        """Measurement vector: position, then range rate when present."""
        if self.radial_velocity is None:
            return np.array(self.position, dtype=float)
        return np.array([*self.position, self.radial_velocity], dtype=float)


class LedgerEntry(BaseModel):
    """Per-sensor observation counts for one step."""

    regular: int = Field(0, ge=0)
    unexpected: int = Field(0, ge=0)
    misses: int = Field(0, ge=0)

    @property
    def observations(self) -> int:
        """All observations: every reported confirmed track."""
        return self.regular + self.unexpected


class ObservationLedger(BaseModel):
    """Per-sensor counts of observations, misses and unexpected observations for one step."""

    timestamp: float
    entries: Dict[int, LedgerEntry] = Field(default_factory=dict)

    def entry(self, sensor_id: int) -> LedgerEntry:
        if sensor_id not in self.entries:
            self.entries[sensor_id] = LedgerEntry()
        return self.entries[sensor_id]

    def register_regular(self, sensor_id: int) -> None:
        self.entry(sensor_id).regular += 1

    def register_unexpected(self, sensor_id: int) -> None:
        self.entry(sensor_id).unexpected += 1

    def register_miss(self, sensor_id: int) -> None:
        self.entry(sensor_id).misses += 1

    def totals(self) -> LedgerEntry:
        """Sum over sensors."""
        total = LedgerEntry()
        for entry in self.entries.values():
            total.regular += entry.regular
            total.unexpected += entry.unexpected
            total.misses += entry.misses
        return total

"""
Sensor metadata: mounting pose, field of view and detection/tracking parameters.
"""

import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

FULL_TURN = 2.0 * math.pi


class Modality(str, Enum):
    """Measurement model family."""
    RADAR = "radar"
    LIDAR = "lidar"


class FieldOfView(BaseModel):
    """Sensor coverage volume (range r, horizontal angle omega, vertical angle psi)."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    range: float = Field(..., gt=0, description="Maximum range r (m)")
    horizontal: float = Field(..., gt=0, le=FULL_TURN, description="Horizontal opening omega (rad)")
    vertical: float = Field(..., gt=0, lt=math.pi, description="Vertical opening psi (rad)")

    @property
    def is_omnidirectional(self) -> bool:
        """True when no azimuth lies outside the coverage."""
        return self.horizontal >= FULL_TURN - 1e-12


class SensorMeta(BaseModel):
    """Pose, coverage and detection parameters of one roadside sensor."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    sensor_id: int = Field(..., ge=0)
    position: Tuple[float, float, float] = Field(..., description="Mount point, global frame (m)")
    yaw: float = Field(0.0, description="Boresight azimuth from +x, counter-clockwise (rad)")
    pitch: float = Field(0.0, description="Boresight elevation, positive up (rad)")
    fov: FieldOfView
    modality: Modality = Modality.RADAR
    trust: float = Field(0.9, gt=0, le=1, description="Object-independent trust factor")
    pd: float = Field(0.9, gt=0, le=1, description="Detection probability")
    pfa: float = Field(1e-6, gt=0, lt=1, description="False-alarm rate per resolution cell")
    confirmation_threshold: Optional[float] = Field(
        None, description="Track confirmation threshold; 1.5 log(pd/pfa) when unset"
    )
    deletion_threshold: float = 0.0
    max_coasting_steps: int = Field(5, ge=1)
    over_range_factor: float = Field(1.0, ge=1.0, description="Range multiplier of the over-range shell")
    over_range_pd_factor: float = Field(1.0 / 3.0, ge=0, le=1, description="pd multiplier in the shell")
    position_noise: float = Field(0.5, ge=0, description="Position std per axis (m)")
    velocity_noise: float = Field(0.2, ge=0, description="Range-rate std (m/s)")
    ghost_probability: float = Field(0.0, ge=0, le=1, description="Side-lobe return probability")
    resolution_cells: int = Field(4096, ge=1)
    process_noise: float = Field(2.0, gt=0, description="White acceleration std (m/s^2)")

    @model_validator(mode='after')
    def check_rates(self) -> "SensorMeta":
        if self.pd <= self.pfa:
            raise ValueError("detection probability must exceed the false-alarm rate")
        return self

    @property
    def log_likelihood_ratio(self) -> float:
        """Per-hit score increment log(pd/pfa)."""
        return math.log(self.pd / self.pfa)

    @property
    def confirmation(self) -> float:
        """Effective confirmation threshold."""
        if self.confirmation_threshold is not None:
            return self.confirmation_threshold
        return 1.5 * self.log_likelihood_ratio

    @property
    def mount(self) -> np.ndarray:
        return np.array(self.position, dtype=float)

    @property
    def over_range(self) -> float:
        return self.fov.range * self.over_range_factor

"""Physical value limits for object attribute checks."""

from pydantic import BaseModel, ConfigDict, Field


class ValueLimits(BaseModel):
    """Empirical attribute maxima plus the VRU thresholds and nominal lane width."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    z_max: float = Field(3.0, gt=0, description="Height of the object center above the road (m)")
    width_max: float = Field(5.0, gt=0)
    length_max: float = Field(25.0, gt=0)
    height_max: float = Field(5.0, gt=0)
    speed_max: float = Field(80.0, gt=0, description="Speed magnitude (m/s)")
    vru_length: float = Field(2.0, gt=0, description="Extent below which an object counts as VRU-sized (m)")
    vru_speed: float = Field(20.0, gt=0, description="Speed above which a VRU-sized object is implausible (m/s)")
    lane_width: float = Field(3.5, gt=0)

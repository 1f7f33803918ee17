"""
Tracker parametrization derived from the sensor's detection statistics.
"""

import math
from functools import lru_cache
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import chi2

from src.models.sensor import SensorMeta


@lru_cache(maxsize=None)
def chi2_gate(probability: float, dof: int) -> float:
    """Chi-square quantile used as a squared Mahalanobis gate."""
    return float(chi2.ppf(probability, dof))


class TrackerConfig(BaseModel):
    """Score-based track management parameters."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    confirmation_threshold: float
    deletion_threshold: float = 0.0
    initial_score: float
    hit_increment: float = Field(..., gt=0)
    miss_decrement: float = Field(..., lt=0)
    gate_probability: float = Field(0.99, gt=0, lt=1)
    process_noise: float = Field(2.0, gt=0, description="White acceleration std (m/s^2)")
    max_coasting_steps: int = Field(5, ge=1)
    initial_velocity_std: float = Field(10.0, gt=0, description="Unobserved velocity std (m/s)")

    @model_validator(mode='after')
    def check_thresholds(self) -> "TrackerConfig":
        if self.confirmation_threshold <= self.deletion_threshold:
            raise ValueError(
                f"confirmation threshold {self.confirmation_threshold} must exceed "
                f"deletion threshold {self.deletion_threshold}"
            )
        return self

    @classmethod
    def from_detection_rates(
        cls,
        pd: float,
        pfa: float,
        confirmation_threshold: Optional[float] = None,
        **overrides
    ) -> "TrackerConfig":
        """
        Log-likelihood ratio scoring: s0 = log(pd/pfa), one hit adds the same,
        one miss adds log((1-pd)/(1-pfa)).
        """
        hit = math.log(pd / pfa)
        # pd = 1 would make a miss infinitely unlikely; keep the decrement finite
        miss = math.log(max(1.0 - pd, 1e-9) / (1.0 - pfa))
        threshold = confirmation_threshold if confirmation_threshold is not None else 1.5 * hit
        return cls(
            confirmation_threshold=threshold,
            initial_score=hit,
            hit_increment=hit,
            miss_decrement=miss,
            **overrides
        )

    @classmethod
    def from_sensor(
        cls,
        sensor: SensorMeta,
        confirmation_threshold: Optional[float] = None
    ) -> "TrackerConfig":
        threshold = confirmation_threshold if confirmation_threshold is not None else sensor.confirmation
        return cls.from_detection_rates(
            sensor.pd,
            sensor.pfa,
            confirmation_threshold=threshold,
            deletion_threshold=sensor.deletion_threshold,
            process_noise=sensor.process_noise,
            max_coasting_steps=sensor.max_coasting_steps,
        )

    def gate(self, dof: int) -> float:
        return chi2_gate(self.gate_probability, dof)

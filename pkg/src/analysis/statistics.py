"""
Confidence intervals over interval means and the cross-sensor baseline.
"""

import math
from typing import Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field
from scipy.stats import norm, t

from src.exceptions import InsufficientDataError


class ConfidenceInterval(BaseModel):
    """Symmetric interval mean +/- half_width; variance is that of the mean estimate."""

    model_config = ConfigDict(frozen=True)

    mean: float
    half_width: float = Field(..., ge=0)
    variance: float = Field(..., ge=0)
    samples: int = Field(..., ge=1)

    @computed_field
    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @computed_field
    @property
    def high(self) -> float:
        return self.mean + self.half_width

    def above(self, other: "ConfidenceInterval") -> bool:
        """Strictly above: the intervals are disjoint and this one is higher."""
        return self.low > other.high

    def below(self, other: "ConfidenceInterval") -> bool:
        return self.high < other.low

    def overlaps(self, other: "ConfidenceInterval") -> bool:
        return not (self.above(other) or self.below(other))


def confidence_interval(values: Iterable[Optional[float]], confidence: float = 0.95) -> ConfidenceInterval:
    """
    Student-t interval of the mean of interval means; missing values are skipped.

    Raises:
        InsufficientDataError: Fewer than two values
    """
    data = np.array([v for v in values if v is not None], dtype=float)
    n = len(data)
    if n < 2:
        raise InsufficientDataError(f"confidence interval needs at least 2 interval means, got {n}")
    mean = float(data.mean())
    std = float(data.std(ddof=1))
    variance = std ** 2 / n
    half_width = float(t.ppf(0.5 + confidence / 2.0, n - 1)) * std / math.sqrt(n)
    return ConfidenceInterval(mean=mean, half_width=half_width, variance=variance, samples=n)


def sensor_baseline(
    intervals: Sequence[ConfidenceInterval],
    confidence: float = 0.95,
    min_sensors: int = 2
) -> ConfidenceInterval:
    """
    Weighted-least-squares average of per-sensor estimates.

    Weights are inverse variances; the baseline variance is 1 / sum(weights).
    Estimates with zero variance dominate: the baseline becomes their common
    value with zero width.

    Raises:
        InsufficientDataError: Fewer than min_sensors estimates
    """
    if len(intervals) < min_sensors:
        raise InsufficientDataError(
            f"baseline needs at least {min_sensors} sensors with valid intervals, got {len(intervals)}"
        )
    means = np.array([ci.mean for ci in intervals])
    variances = np.array([ci.variance for ci in intervals])
    samples = int(sum(ci.samples for ci in intervals))

    exact = variances <= 0.0
    if exact.any():
        return ConfidenceInterval(mean=float(means[exact].mean()), half_width=0.0, variance=0.0, samples=samples)

    weights = 1.0 / variances
    mean = float(np.sum(weights * means) / np.sum(weights))
    variance = float(1.0 / np.sum(weights))
    half_width = float(norm.ppf(0.5 + confidence / 2.0)) * math.sqrt(variance)
    return ConfidenceInterval(mean=mean, half_width=half_width, variance=variance, samples=samples)

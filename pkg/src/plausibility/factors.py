"""
Single-sensor plausibility factors and the basic belief assignment built from them.
"""

import math
from typing import Sequence

from pydantic import BaseModel, ConfigDict, Field

from src.exceptions import CalibrationError
from src.models.geometry import bounding_box_points, fov_distance, in_fov, line_of_sight, map_distance
from src.models.road_map import DigitalMap
from src.models.schema import BeliefMass, LocalObject
from src.models.sensor import SensorMeta
from src.plausibility.limits import ValueLimits

P_EX_TENTATIVE = 0.9
P_EX_CONFIRMED = 0.99


class BbaFactors(BaseModel):
    """Plausibility factors of one sensor's view of one object."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    p_trust: float = Field(..., ge=0.0, le=1.0)
    p_fov: float = Field(1.0, ge=0.0, le=1.0)
    p_occ: float = Field(1.0, ge=0.0, le=1.0)
    p_ex: float = Field(1.0, ge=0.0, le=1.0)
    p_dm: float = Field(1.0, ge=0.0, le=1.0)
    p_val: float = Field(1.0, ge=0.0, le=1.0)


class SigmoidCalib(BaseModel):
    """Coefficients of p_ex = 1 / (1 + exp(-alpha * score + beta))."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    alpha: float = Field(..., gt=0)
    beta: float

    def __call__(self, score: float) -> float:
        exponent = -self.alpha * score + self.beta
        if exponent > 700.0:
            return 0.0
        return 1.0 / (1.0 + math.exp(exponent))


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def calibrate_sigmoid(initial_score: float, confirmation_threshold: float) -> SigmoidCalib:
    """
    Fit the score sigmoid so a fresh track maps to 0.9 and a track at the
    confirmation threshold to 0.99.

    Raises:
        CalibrationError: confirmation threshold not above the initial score
    """
    if confirmation_threshold <= initial_score:
        raise CalibrationError(
            f"confirmation threshold {confirmation_threshold} must exceed initial score {initial_score}"
        )
    # Line through (initial score, tentative) and (threshold, confirmed) in logit space
    low, high = _logit(P_EX_TENTATIVE), _logit(P_EX_CONFIRMED)
    alpha = (high - low) / (confirmation_threshold - initial_score)
    beta = alpha * initial_score - low
    return SigmoidCalib(alpha=alpha, beta=beta)


def calibrate_for_sensor(sensor: SensorMeta) -> SigmoidCalib:
    """Calibration against the sensor's nominal tracker parameters."""
    return calibrate_sigmoid(sensor.log_likelihood_ratio, sensor.confirmation)


def p_fov_factor(obj: LocalObject, sensor: SensorMeta) -> float:
    points = bounding_box_points(obj.state, obj.dims)
    # any corner inside counts as seen
    if in_fov(points, sensor):
        return 1.0
    d_range, d_azimuth, d_elevation = fov_distance(obj.state, sensor)
    fov = sensor.fov
    exponent = d_range / (fov.range / 2.0) + d_elevation / (fov.vertical / 2.0)
    # a full-turn sensor has no azimuth limit to violate
    if not fov.is_omnidirectional:
        exponent += d_azimuth / (fov.horizontal / 2.0)
    return math.exp(-exponent)


def p_occ_factor(obj: LocalObject, siblings: Sequence[LocalObject], sensor: SensorMeta) -> float:
    """0 for a non-coasting object hidden behind the sensor's other objects, else 1."""
    if obj.status.coasting:
        return 1.0
    return 1.0 if line_of_sight(obj, siblings, sensor) else 0.0


def p_ex_factor(obj: LocalObject, calib: SigmoidCalib) -> float:
    return calib(obj.status.score)


def p_dm_factor(obj: LocalObject, road_map: DigitalMap, limits: ValueLimits) -> float:
    return math.exp(-map_distance(obj.state, road_map) / limits.lane_width)


def p_val_factor(obj: LocalObject, limits: ValueLimits) -> float:
    attributes = (
        (obj.state.z, limits.z_max),
        (obj.dims.width, limits.width_max),
        (obj.dims.length, limits.length_max),
        (obj.dims.height, limits.height_max),
        (obj.state.speed, limits.speed_max),
    )
    # relative overshoot, summed
    penalty = sum(max(0.0, value - maximum) / maximum for value, maximum in attributes)
    return math.exp(-penalty)


def compute_bba(factors: BbaFactors) -> BeliefMass:
    """
    Basic belief assignment.

    The view factors (trust, FoV, occlusion) scale the committed mass; the
    evidence factors (existence, map, value) split it between exists and not exists.
    """
    committed = factors.p_trust * factors.p_fov * factors.p_occ
    support = factors.p_ex * factors.p_dm * factors.p_val
    m_exists = committed * support
    m_not_exists = committed * (1.0 - support)
    return BeliefMass(
        m_exists=m_exists,
        m_not_exists=m_not_exists,
        m_unknown=1.0 - m_exists - m_not_exists,
    )


def miss_mass(trust: float) -> BeliefMass:
    """Mass of a sensor that should have seen the object but has no track of it."""
    return compute_bba(BbaFactors(p_trust=trust, p_ex=0.0))


def object_bba(
    obj: LocalObject,
    siblings: Sequence[LocalObject],
    sensor: SensorMeta,
    road_map: DigitalMap,
    limits: ValueLimits,
    calib: SigmoidCalib
) -> BeliefMass:
    """Full single-sensor BBA of a reported object."""
    factors = BbaFactors(
        p_trust=sensor.trust,
        p_fov=p_fov_factor(obj, sensor),
        p_occ=p_occ_factor(obj, siblings, sensor),
        p_ex=p_ex_factor(obj, calib),
        p_dm=p_dm_factor(obj, road_map, limits),
        p_val=p_val_factor(obj, limits),
    )
    return compute_bba(factors)

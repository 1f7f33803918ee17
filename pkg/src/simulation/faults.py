"""
Fault injection: how each fault variant alters one sensor.
"""

import math
from typing import Optional, Tuple

from src.models.schema import normalize_angle
from src.models.sensor import SensorMeta
from src.simulation.config import (
    BlindSpotFault,
    FalseAlarmRateFault,
    MisorientationFault,
    TrackerThresholdFault,
)

FAULT_EFFECTS = {
    1: "sensor reports readings with incorrect angles",
    2: "higher false positive rate than expected",
    3: "higher false negative rate than expected",
}


def _targets(sensor: SensorMeta, fault) -> bool:
    return fault is not None and fault.sensor_id == sensor.sensor_id


def actual_pose(sensor: SensorMeta, fault) -> SensorMeta:
    """The physical pose of the sensor; differs from the nominal one only under misorientation."""
    if _targets(sensor, fault) and isinstance(fault, MisorientationFault) and fault.delta != 0.0:
        return sensor.model_copy(update={'yaw': sensor.yaw + fault.delta})
    return sensor


def blind_wedge(sensor: SensorMeta, fault) -> Optional[Tuple[float, float]]:
    """(center azimuth relative to boresight, width) of a blind spot, or None."""
    if not (_targets(sensor, fault) and isinstance(fault, BlindSpotFault)):
        return None
    if fault.center_azimuth_deg is not None:
        center = math.radians(fault.center_azimuth_deg)
    else:
        x, y, _ = sensor.position
        center = math.atan2(-y, -x) - sensor.yaw
    return normalize_angle(center), fault.width


def false_alarm_factor(sensor: SensorMeta, fault) -> float:
    if _targets(sensor, fault) and isinstance(fault, FalseAlarmRateFault):
        return fault.factor
    return 1.0


def confirmation_threshold(sensor: SensorMeta, fault) -> Optional[float]:
    """Substituted tracker threshold, or None for the nominal one."""
    if _targets(sensor, fault) and isinstance(fault, TrackerThresholdFault):
        return fault.faulty_threshold(sensor)
    return None


def describe(fault) -> str:
    if fault is None:
        return "none"
    return f"{fault.type} on sensor {fault.sensor_id} (class {fault.fault_class}: {FAULT_EFFECTS[fault.fault_class]})"

"""
Parametric detection model of the roadside sensors.

Detections are generated in the sensor's actual frame; a misoriented sensor
reports them as if mounted with its nominal pose.
"""

import math
from typing import List, Optional, Sequence, Union

import numpy as np

from src.models.geometry import (
    BoxArrays,
    box_points,
    fov_mask,
    segments_blocked,
    spherical,
    to_sensor_frame,
)
from src.models.schema import Detection, Dimensions, normalize_angle
from src.models.sensor import Modality, SensorMeta
from src.simulation.faults import actual_pose, blind_wedge, false_alarm_factor
from src.simulation.traffic import TruthState

STREAM_SENSING = 1
EXTENT_NOISE = 0.03
HEADING_NOISE = 0.02
GHOST_OFFSET = (2.5, 5.0)
CLUTTER_EXTENT = (1.0, 1.0, 1.0)

Seed = Union[int, Sequence[int]]


def truth_boxes(snapshot: Sequence[TruthState]) -> BoxArrays:
    if not snapshot:
        return BoxArrays.empty()
    return BoxArrays(
        centers=np.array([obj.position for obj in snapshot]),
        half_extents=np.array([obj.dims.half_extents for obj in snapshot]),
        headings=np.array([obj.dims.heading for obj in snapshot]),
    )


def _without(boxes: BoxArrays, index: int) -> BoxArrays:
    keep = np.arange(len(boxes)) != index
    return BoxArrays(boxes.centers[keep], boxes.half_extents[keep], boxes.headings[keep])


def _noise_matrix(sensor: SensorMeta) -> np.ndarray:
    variance = [sensor.position_noise ** 2] * 3
    if sensor.modality is Modality.RADAR:
        variance.append(sensor.velocity_noise ** 2)
    # a noiseless sensor still needs a non-singular covariance for the filter
    return np.diag(np.maximum(variance, 1e-6))


def _detection(
    sensor: SensorMeta,
    timestamp: float,
    local_position: np.ndarray,
    range_rate: float,
    extent: Dimensions,
    noise: np.ndarray
) -> Detection:
    return Detection(
        sensor_id=sensor.sensor_id,
        timestamp=timestamp,
        position=tuple(float(v) for v in local_position),
        radial_velocity=float(range_rate) if sensor.modality is Modality.RADAR else None,
        noise=noise,
        extent=extent,
    )


def sense(
    snapshot: Sequence[TruthState],
    sensor: SensorMeta,
    fault=None,
    seed: Seed = 0,
    timestamp: float = 0.0
) -> List[Detection]:
    """
    Simulate one scan of a sensor.

    Args:
        snapshot: Ground truth at the scan time
        sensor: Nominal sensor metadata
        fault: Active fault of the run, or None
        seed: Entropy for this (run, sensor, step)
        timestamp: Scan time (s)

    Returns:
        Detections in the sensor's nominal frame, objects first, then clutter
    """
    rng = np.random.default_rng(seed)
    actual = actual_pose(sensor, fault)
    wedge = blind_wedge(sensor, fault)
    noise = _noise_matrix(sensor)
    position_std = sensor.position_noise
    rotation_yaw = actual.yaw
    boxes = truth_boxes(snapshot)
    detections: List[Detection] = []

    for index, obj in enumerate(snapshot):
        points = box_points(obj.position, obj.dims)
        inside = fov_mask(points, actual)
        local_center = to_sensor_frame(obj.position, actual)[0]
        rng_c, az_c, el_c = (float(v[0]) for v in spherical(local_center))

        probability = sensor.pd
        if not inside.any():
            within_angles = abs(el_c) <= actual.fov.vertical / 2.0 and (
                actual.fov.is_omnidirectional or abs(az_c) <= actual.fov.horizontal / 2.0
            )
            if not (within_angles and actual.fov.range < rng_c <= actual.over_range):
                continue
            probability = sensor.pd * sensor.over_range_pd_factor
            visible_candidates = points
        else:
            visible_candidates = points[inside]

        if wedge is not None and abs(normalize_angle(az_c - wedge[0])) <= wedge[1] / 2.0:
            continue
        blockers = _without(boxes, index)
        if len(blockers) and segments_blocked(actual.mount, visible_candidates, blockers).all():
            continue
        if rng.random() >= probability:
            continue

        offset = obj.position - actual.mount
        distance = float(np.linalg.norm(offset))
        range_rate = float(offset @ obj.velocity) / distance if distance > 0 else 0.0
        measured = local_center + rng.normal(0.0, position_std, size=3)
        measured_rate = range_rate + rng.normal(0.0, sensor.velocity_noise)
        scale = 1.0 + rng.normal(0.0, EXTENT_NOISE, size=3)
        extent = Dimensions(
            length=max(obj.dims.length * scale[0], 0.1),
            width=max(obj.dims.width * scale[1], 0.1),
            height=max(obj.dims.height * scale[2], 0.1),
            heading=obj.dims.heading - rotation_yaw + rng.normal(0.0, HEADING_NOISE),
        )
        detections.append(_detection(sensor, timestamp, measured, measured_rate, extent, noise))

        if sensor.ghost_probability > 0 and rng.random() < sensor.ghost_probability:
            lateral = np.array([-local_center[1], local_center[0], 0.0])
            norm = float(np.linalg.norm(lateral))
            if norm > 0:
                side = 1.0 if rng.random() < 0.5 else -1.0
                shift = side * rng.uniform(*GHOST_OFFSET) * lateral / norm
                ghost = local_center + shift + rng.normal(0.0, position_std, size=3)
                detections.append(_detection(sensor, timestamp, ghost, measured_rate, extent, noise))

    detections.extend(_clutter(sensor, fault, rng, timestamp, noise))
    return detections


def _clutter(sensor: SensorMeta, fault, rng: np.random.Generator, timestamp: float, noise) -> List[Detection]:
    """False alarms uniform over the FoV volume at pfa per resolution cell."""
    expected = sensor.pfa * sensor.resolution_cells * false_alarm_factor(sensor, fault)
    count = int(rng.poisson(expected))
    fov = sensor.fov
    clutter = []
    for _ in range(count):
        distance = fov.range * rng.random() ** (1.0 / 3.0)
        azimuth = rng.uniform(-fov.horizontal / 2.0, fov.horizontal / 2.0)
        elevation = rng.uniform(-fov.vertical / 2.0, fov.vertical / 2.0)
        local = distance * np.array([
            math.cos(elevation) * math.cos(azimuth),
            math.cos(elevation) * math.sin(azimuth),
            math.sin(elevation),
        ])
        extent = Dimensions(
            length=CLUTTER_EXTENT[0], width=CLUTTER_EXTENT[1], height=CLUTTER_EXTENT[2],
            heading=rng.uniform(-math.pi, math.pi),
        )
        clutter.append(_detection(sensor, timestamp, local, rng.normal(0.0, sensor.velocity_noise), extent, noise))
    return clutter


def scan_seed(run_seed: int, sensor_id: int, step: int) -> List[int]:
    """Independent stream per (run, sensor, step)."""
    return [run_seed, STREAM_SENSING, sensor_id, step]

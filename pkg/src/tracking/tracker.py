"""
Per-sensor multi-object tracker: EKF bank with log-likelihood ratio track scoring.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.models.geometry import sensor_rotation
from src.models.schema import Detection, Dimensions, LocalObject, StateVector, TrackStatus, normalize_angle
from src.models.sensor import SensorMeta
from src.tracking import ekf
from src.tracking.config import TrackerConfig
from src.utils.assignment import gated_assignment

logger = logging.getLogger(__name__)

DEFAULT_DIMENSIONS = (4.5, 1.8, 1.5)
DIMENSION_SMOOTHING = 0.5
# Pairs farther apart than this (plus three position sigmas) skip the Mahalanobis evaluation
COARSE_GATE = 10.0


@dataclass
class Track:
    """Mutable filter state of one track."""

    track_id: int
    state: np.ndarray
    covariance: np.ndarray
    score: float
    dims: Dimensions
    confirmed: bool = False
    coasting: bool = False
    hits: int = 1
    misses_in_row: int = 0

    def to_local_object(self, sensor_id: int, timestamp: float) -> LocalObject:
        return LocalObject(
            sensor_id=sensor_id,
            track_id=self.track_id,
            timestamp=timestamp,
            state=StateVector.from_array(self.state),
            covariance=ekf.symmetrize(self.covariance),
            dims=self.dims,
            status=TrackStatus(score=self.score, confirmed=self.confirmed, coasting=self.coasting),
        )


def predict(tracks: List[Track], dt: float, config: TrackerConfig) -> List[Track]:
    """Advance every track by dt under the constant-velocity model."""
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    for track in tracks:
        track.state, track.covariance = ekf.predict_state(
            track.state, track.covariance, dt, config.process_noise
        )
    return tracks


def _blend_dims(current: Dimensions, measured: Dimensions, alpha: float) -> Dimensions:
    heading = math.atan2(
        alpha * math.sin(measured.heading) + (1 - alpha) * math.sin(current.heading),
        alpha * math.cos(measured.heading) + (1 - alpha) * math.cos(current.heading),
    )
    return Dimensions(
        length=alpha * measured.length + (1 - alpha) * current.length,
        width=alpha * measured.width + (1 - alpha) * current.width,
        height=alpha * measured.height + (1 - alpha) * current.height,
        heading=heading,
    )


def _global_extent(detection: Detection, sensor: SensorMeta) -> Optional[Dimensions]:
    if detection.extent is None:
        return None
    return detection.extent.model_copy(
        update={'heading': normalize_angle(detection.extent.heading + sensor.yaw)}
    )


def associate_and_update(
    tracks: List[Track],
    detections: Sequence[Detection],
    config: TrackerConfig,
    sensor: SensorMeta
) -> Tuple[List[Track], List[Detection]]:
    """
    Gated global nearest-neighbour assignment followed by EKF updates.

    Matched tracks gain score and stop coasting; unmatched tracks lose score
    and coast.

    Returns:
        The tracks and the detections left for track initiation
    """
    rotation = sensor_rotation(sensor.yaw, sensor.pitch)
    mount = sensor.mount
    detections = list(detections)

    if tracks and detections:
        det_positions = np.array([d.position for d in detections]) @ rotation.T + mount
        cost = np.full((len(tracks), len(detections)), np.inf)
        innovations = {}
        for i, track in enumerate(tracks):
            # coarse Euclidean prefilter before the Mahalanobis gate
            spread = 3.0 * math.sqrt(max(float(np.max(np.diag(track.covariance)[0:3])), 0.0))
            near = np.linalg.norm(det_positions - track.state[0:3], axis=1) <= COARSE_GATE + spread
            for j in np.nonzero(near)[0]:
                detection = detections[j]
                innov = ekf.innovation(
                    track.state, track.covariance, detection.measurement, detection.noise, mount, rotation
                )
                if innov.distance <= config.gate(len(detection.measurement)):
                    cost[i, j] = innov.distance
                    innovations[(i, int(j))] = innov
        # per-entry gates were applied above; this one only bounds the solver
        gate = max(config.gate(3), config.gate(4))
        result = gated_assignment(cost, gate)
        matches = result.matches
        unmatched_tracks = result.unmatched_rows
        unassigned = [detections[j] for j in result.unmatched_cols]
    else:
        matches = []
        unmatched_tracks = list(range(len(tracks)))
        unassigned = detections

    # Hits
    for i, j in matches:
        track = tracks[i]
        detection = detections[j]
        track.state, track.covariance = ekf.update_state(
            track.state, track.covariance, detection.noise, innovations[(i, j)]
        )
        track.score += config.hit_increment
        track.coasting = False
        track.hits += 1
        track.misses_in_row = 0
        extent = _global_extent(detection, sensor)
        if extent is not None:
            track.dims = _blend_dims(track.dims, extent, DIMENSION_SMOOTHING)

    # Misses: score drops, state keeps its prediction
    for i in unmatched_tracks:
        track = tracks[i]
        track.score += config.miss_decrement
        track.coasting = True
        track.misses_in_row += 1

    return tracks, unassigned


def initiate_track(
    detection: Detection,
    track_id: int,
    config: TrackerConfig,
    sensor: SensorMeta
) -> Track:
    """New tentative track from a single detection."""
    rotation = sensor_rotation(sensor.yaw, sensor.pitch)
    position = rotation @ np.array(detection.position) + sensor.mount
    position_cov = rotation @ detection.noise[0:3, 0:3] @ rotation.T

    offset = position - sensor.mount
    rng = float(np.linalg.norm(offset))
    unit = offset / rng if rng > 0 else rotation[:, 0]
    unobserved = config.initial_velocity_std ** 2
    # Doppler observes the radial component only
    if detection.radial_velocity is not None:
        velocity = detection.radial_velocity * unit
        along = np.outer(unit, unit)
        velocity_cov = detection.noise[3, 3] * along + unobserved * (np.eye(3) - along)
    else:
        velocity = np.zeros(3)
        velocity_cov = unobserved * np.eye(3)

    covariance = np.zeros((6, 6))
    covariance[0:3, 0:3] = position_cov
    covariance[3:6, 3:6] = velocity_cov

    dims = _global_extent(detection, sensor)
    if dims is None:
        heading = math.atan2(velocity[1], velocity[0]) if np.linalg.norm(velocity[0:2]) > 1.0 else sensor.yaw
        dims = Dimensions(
            length=DEFAULT_DIMENSIONS[0],
            width=DEFAULT_DIMENSIONS[1],
            height=DEFAULT_DIMENSIONS[2],
            heading=heading,
        )

    return Track(
        track_id=track_id,
        state=np.concatenate([position, velocity]),
        covariance=ekf.symmetrize(covariance),
        score=config.initial_score,
        dims=dims,
        confirmed=config.initial_score >= config.confirmation_threshold,
    )


def manage_tracks(
    tracks: List[Track],
    unassigned: Sequence[Detection],
    config: TrackerConfig,
    sensor: SensorMeta,
    track_ids: Iterator[int]
) -> List[Track]:
    """Delete stale tracks, confirm tracks at threshold and initiate new ones."""
    survivors = []
    for track in tracks:
        if track.score < config.deletion_threshold or track.misses_in_row >= config.max_coasting_steps:
            logger.debug(f"Sensor {sensor.sensor_id}: deleted track {track.track_id} (score {track.score:.2f})")
            continue
        if not track.confirmed and track.score >= config.confirmation_threshold:
            track.confirmed = True
            logger.debug(f"Sensor {sensor.sensor_id}: confirmed track {track.track_id}")
        survivors.append(track)

    for detection in unassigned:
        survivors.append(initiate_track(detection, next(track_ids), config, sensor))
    return survivors


class SensorTracker:
    """Stateful tracker of one sensor; drive from one thread at a time."""

    def __init__(self, sensor: SensorMeta, config: Optional[TrackerConfig] = None):
        self.sensor = sensor
        self.config = config or TrackerConfig.from_sensor(sensor)
        self.tracks: List[Track] = []
        self._track_ids = itertools.count(1)
        self._last_timestamp: Optional[float] = None

    def step(self, detections: Sequence[Detection], timestamp: float) -> List[LocalObject]:
        """
        Process one scan.

        Args:
            detections: Scan of this sensor
            timestamp: Scan time (s)

        Returns:
            Confirmed tracks as local objects
        """
        dt = 0.0 if self._last_timestamp is None else timestamp - self._last_timestamp
        self._last_timestamp = timestamp

        predict(self.tracks, dt, self.config)
        self.tracks, unassigned = associate_and_update(self.tracks, detections, self.config, self.sensor)
        self.tracks = manage_tracks(self.tracks, unassigned, self.config, self.sensor, self._track_ids)
        return self.confirmed_objects(timestamp)

    def confirmed_objects(self, timestamp: float) -> List[LocalObject]:
        return [
            track.to_local_object(self.sensor.sensor_id, timestamp)
            for track in self.tracks if track.confirmed
        ]

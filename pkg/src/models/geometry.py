"""
Geometry helpers: sensor frames, field-of-view containment, occlusion and map distance.

Coordinates are right-handed with x east, y north, z up. Azimuth is measured
from the sensor boresight, counter-clockwise positive.
"""

import math
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from src.exceptions import MapError
from src.models.road_map import DigitalMap
from src.models.schema import Dimensions, LocalObject, StateVector
from src.models.sensor import SensorMeta

# Corner sign pattern in (length, width, height) order
_CORNER_SIGNS = np.array([
    [sx, sy, sz] for sx in (1.0, -1.0) for sy in (1.0, -1.0) for sz in (1.0, -1.0)
])
_PARALLEL_EPS = 1e-12


class BoxArrays(NamedTuple):
    """Oriented boxes as parallel arrays: centers (k,3), half extents (k,3), headings (k,)."""
    centers: np.ndarray
    half_extents: np.ndarray
    headings: np.ndarray

    @classmethod
    def empty(cls) -> "BoxArrays":
        return cls(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0))

    def __len__(self) -> int:
        return len(self.headings)


def rotation_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def sensor_rotation(yaw: float, pitch: float) -> np.ndarray:
    """Sensor-to-global rotation; columns are the sensor axes in the global frame."""
    c, s = math.cos(-pitch), math.sin(-pitch)
    rot_y = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return rotation_z(yaw) @ rot_y


def to_sensor_frame(points: np.ndarray, sensor: SensorMeta) -> np.ndarray:
    """Express global points (n,3) in the sensor frame."""
    rotation = sensor_rotation(sensor.yaw, sensor.pitch)
    return (np.atleast_2d(points) - sensor.mount) @ rotation


def to_global_frame(points: np.ndarray, sensor: SensorMeta) -> np.ndarray:
    """Inverse of to_sensor_frame."""
    rotation = sensor_rotation(sensor.yaw, sensor.pitch)
    return np.atleast_2d(points) @ rotation.T + sensor.mount


def spherical(local: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(range, azimuth, elevation) of sensor-frame points."""
    local = np.atleast_2d(local)
    horizontal = np.hypot(local[:, 0], local[:, 1])
    rng = np.hypot(horizontal, local[:, 2])
    azimuth = np.arctan2(local[:, 1], local[:, 0])
    elevation = np.arctan2(local[:, 2], horizontal)
    return rng, azimuth, elevation


def box_points(center: np.ndarray, dims: Dimensions) -> np.ndarray:
    """
    The 11 check points of an oriented box.

    Rows 0-7 are the corners, row 8 the center, rows 9 and 10 the front and
    rear face midpoints at mid-height.
    """
    half = dims.half_extents
    local = np.vstack([
        _CORNER_SIGNS * half,
        np.zeros(3),
        [half[0], 0.0, 0.0],
        [-half[0], 0.0, 0.0],
    ])
    return local @ rotation_z(dims.heading).T + np.asarray(center, dtype=float)


def bounding_box_points(state: StateVector, dims: Dimensions) -> np.ndarray:
    """Check points of the box at the state's position, shape (11, 3)."""
    return box_points(state.position, dims)


def fov_mask(points: np.ndarray, sensor: SensorMeta) -> np.ndarray:
    """Per-point containment in the sensor's FoV."""
    rng, azimuth, elevation = spherical(to_sensor_frame(points, sensor))
    fov = sensor.fov
    inside = (rng <= fov.range) & (np.abs(elevation) <= fov.vertical / 2.0)
    if not fov.is_omnidirectional:
        inside &= np.abs(azimuth) <= fov.horizontal / 2.0
    return inside


def in_fov(points: np.ndarray, sensor: SensorMeta) -> bool:
    """True iff at least one point lies inside the FoV."""
    return bool(fov_mask(points, sensor).any())


def fov_distance(state: StateVector, sensor: SensorMeta) -> Tuple[float, float, float]:
    """Excess of the object center over range, half azimuth and half elevation."""
    rng, azimuth, elevation = spherical(to_sensor_frame(state.position, sensor))
    fov = sensor.fov
    d_range = max(0.0, float(rng[0]) - fov.range)
    d_azimuth = 0.0
    if not fov.is_omnidirectional:
        d_azimuth = max(0.0, abs(float(azimuth[0])) - fov.horizontal / 2.0)
    d_elevation = max(0.0, abs(float(elevation[0])) - fov.vertical / 2.0)
    return d_range, d_azimuth, d_elevation


def boxes_from_objects(objects: Sequence[LocalObject]) -> BoxArrays:
    if not objects:
        return BoxArrays.empty()
    return BoxArrays(
        centers=np.array([obj.state.position for obj in objects]),
        half_extents=np.array([obj.dims.half_extents for obj in objects]),
        headings=np.array([obj.dims.heading for obj in objects]),
    )


def segments_blocked(origin: np.ndarray, points: np.ndarray, boxes: BoxArrays) -> np.ndarray:
    """
    Slab test of the segments origin->point against oriented boxes.

    Args:
        origin: Segment start (3,)
        points: Segment ends (n, 3)
        boxes: Obstacles

    Returns:
        Boolean array (n,), True where the segment crosses any box
    """
    points = np.atleast_2d(points)
    if len(boxes) == 0:
        return np.zeros(len(points), dtype=bool)

    cos_h = np.cos(boxes.headings)
    sin_h = np.sin(boxes.headings)

    def into_box_frame(vectors, c, s):
        x = c * vectors[..., 0] + s * vectors[..., 1]
        y = -s * vectors[..., 0] + c * vectors[..., 1]
        return np.stack([x, y, vectors[..., 2]], axis=-1)

    start = into_box_frame(np.asarray(origin)[None, :] - boxes.centers, cos_h, sin_h)[:, None, :]
    end = into_box_frame(
        points[None, :, :] - boxes.centers[:, None, :], cos_h[:, None], sin_h[:, None]
    )
    direction = end - start
    half = boxes.half_extents[:, None, :]

    parallel = np.abs(direction) < _PARALLEL_EPS
    inside_slab = np.abs(start) <= half
    with np.errstate(divide='ignore', invalid='ignore'):
        t_low = (-half - start) / direction
        t_high = (half - start) / direction
    t_near = np.where(parallel, np.where(inside_slab, -np.inf, np.inf), np.minimum(t_low, t_high))
    t_far = np.where(parallel, np.where(inside_slab, np.inf, -np.inf), np.maximum(t_low, t_high))

    enter = np.maximum(t_near.max(axis=2), 0.0)
    leave = np.minimum(t_far.min(axis=2), 1.0)
    return (enter < leave).any(axis=0)


def visible_points(points: np.ndarray, sensor: SensorMeta, blockers: BoxArrays) -> np.ndarray:
    """Per-point unobstructed view from the sensor mount."""
    return ~segments_blocked(sensor.mount, points, blockers)


def line_of_sight(target: LocalObject, blockers: Sequence[LocalObject], sensor: SensorMeta) -> bool:
    """True iff any of the target's check points has a clear segment to the sensor."""
    if not blockers:
        return True
    points = bounding_box_points(target.state, target.dims)
    return bool(visible_points(points, sensor, boxes_from_objects(blockers)).any())


def in_clear_fov(points: np.ndarray, sensor: SensorMeta, blockers: BoxArrays) -> bool:
    """True iff some point is both inside the FoV and unobstructed."""
    inside = fov_mask(points, sensor)
    if not inside.any():
        return False
    if len(blockers) == 0:
        return True
    return bool(visible_points(points[inside], sensor, blockers).any())


def map_distance(state: StateVector, road_map: DigitalMap) -> float:
    """
    Distance from the object position to the nearest road square.

    Raises:
        MapError: The map has no road cells
    """
    tree = road_map.road_tree()
    if tree is None:
        raise MapError("no road cells")
    if road_map.is_road(state.x, state.y):
        return 0.0
    distance, _ = tree.query([state.x, state.y])
    return max(0.0, float(distance) - road_map.half_diagonal)

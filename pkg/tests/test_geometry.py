"""Tests for frames, FoV containment, occlusion and map distance."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.exceptions import MapError  # noqa: E402
from src.models import DigitalMap, Dimensions, LaneGeometry, StateVector, highway_map  # noqa: E402
from src.models.geometry import (  # noqa: E402
    BoxArrays,
    bounding_box_points,
    fov_distance,
    in_fov,
    line_of_sight,
    map_distance,
    segments_blocked,
    to_global_frame,
    to_sensor_frame,
)
from tests.factories import make_object, make_sensor  # noqa: E402


@pytest.fixture
def sensor():
    """Sensor at the origin looking along +x: 100 m, 90 deg, 30 deg."""
    return make_sensor(position=(0.0, 0.0, 0.0))


class TestFrames:
    """Sensor and global frames."""

    def test_yaw_rotates_boresight(self):
        sensor = make_sensor(position=(0.0, 0.0, 0.0), yaw_deg=90.0)
        local = to_sensor_frame(np.array([0.0, 10.0, 0.0]), sensor)[0]
        assert local == pytest.approx([10.0, 0.0, 0.0], abs=1e-12)

    def test_positive_pitch_looks_up(self):
        sensor = make_sensor(position=(0.0, 0.0, 0.0)).model_copy(update={'pitch': math.radians(10.0)})
        target = np.array([10.0, 0.0, 10.0 * math.tan(math.radians(10.0))])
        local = to_sensor_frame(target, sensor)[0]
        assert local[1:] == pytest.approx([0.0, 0.0], abs=1e-12)
        assert local[0] == pytest.approx(10.0 / math.cos(math.radians(10.0)))

    def test_round_trip(self):
        sensor = make_sensor(position=(5.0, -3.0, 2.0), yaw_deg=37.0)
        points = np.array([[1.0, 2.0, 3.0], [-4.0, 0.5, 0.0]])
        assert to_global_frame(to_sensor_frame(points, sensor), sensor) == pytest.approx(points)


def test_bounding_box_points_layout():
    dims = Dimensions(length=4.0, width=2.0, height=1.0, heading=math.pi / 2)
    points = bounding_box_points(StateVector(x=10.0, y=0.0, z=0.5), dims)
    assert points.shape == (11, 3)
    assert points[8] == pytest.approx([10.0, 0.0, 0.5])
    # front face midpoint lies along the heading
    assert points[9] == pytest.approx([10.0, 2.0, 0.5])
    assert points[10] == pytest.approx([10.0, -2.0, 0.5])
    assert points[:8, 2].min() == pytest.approx(0.0)
    assert points[:8, 2].max() == pytest.approx(1.0)


@given(
    st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-10.0, 10.0),
    st.floats(0.1, 30.0), st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(-10.0, 10.0),
)
def test_corner_centroid_is_center(x, y, z, length, width, height, heading):
    dims = Dimensions(length=length, width=width, height=height, heading=heading)
    points = bounding_box_points(StateVector(x=x, y=y, z=z), dims)
    assert points.shape == (11, 3)
    assert points[:8].mean(axis=0) == pytest.approx([x, y, z], abs=1e-9)


class TestFieldOfView:
    """Containment and distance to the FoV."""

    def test_point_inside(self, sensor):
        assert in_fov(np.array([[50.0, 0.0, 0.0]]), sensor)

    def test_point_outside_azimuth(self, sensor):
        assert not in_fov(np.array([[50.0, 60.0, 0.0]]), sensor)

    def test_point_beyond_range(self, sensor):
        assert not in_fov(np.array([[150.0, 0.0, 0.0]]), sensor)

    def test_any_point_suffices(self, sensor):
        points = np.array([[150.0, 0.0, 0.0], [99.0, 0.0, 0.0]])
        assert in_fov(points, sensor)

    def test_omnidirectional_sees_behind(self):
        sensor = make_sensor(position=(0.0, 0.0, 0.0), horizontal_deg=360.0)
        assert in_fov(np.array([[-50.0, 0.0, 0.0]]), sensor)

    def test_fov_distance(self, sensor):
        assert fov_distance(StateVector(x=150.0, y=0.0, z=0.0), sensor) == pytest.approx((50.0, 0.0, 0.0))
        d_range, d_azimuth, d_elevation = fov_distance(StateVector(x=0.0, y=50.0, z=0.0), sensor)
        assert d_range == 0.0
        assert d_azimuth == pytest.approx(math.pi / 4)
        assert d_elevation == 0.0

    def test_fov_distance_zero_inside(self, sensor):
        assert fov_distance(StateVector(x=30.0, y=5.0, z=1.0), sensor) == (0.0, 0.0, 0.0)

    @settings(max_examples=300)
    @given(
        st.tuples(st.floats(-200.0, 200.0), st.floats(-200.0, 200.0), st.floats(-50.0, 50.0)),
        st.floats(1.0, 150.0), st.floats(1.0, 360.0), st.floats(1.0, 170.0),
        st.floats(0.0, 100.0), st.floats(0.0, 360.0), st.floats(0.0, 170.0),
    )
    def test_enlarging_coverage_keeps_point_inside(self, point, range_m, horizontal, vertical, dr, dh, dv):
        small = make_sensor(position=(0.0, 0.0, 0.0), range_m=range_m,
                            horizontal_deg=horizontal, vertical_deg=vertical)
        large = make_sensor(position=(0.0, 0.0, 0.0), range_m=range_m + dr,
                            horizontal_deg=min(horizontal + dh, 360.0), vertical_deg=min(vertical + dv, 179.0))
        points = np.array([point])
        if in_fov(points, small):
            assert in_fov(points, large)


class TestOcclusion:
    """Segment versus box tests."""

    def test_segment_through_box_blocked(self):
        boxes = BoxArrays(np.array([[5.0, 0.0, 0.0]]), np.array([[1.0, 1.0, 1.0]]), np.array([0.0]))
        blocked = segments_blocked(np.zeros(3), np.array([[10.0, 0.0, 0.0], [10.0, 5.0, 0.0]]), boxes)
        assert blocked.tolist() == [True, False]

    def test_rotated_box(self):
        # a thin wall along y, turned by 90 degrees, lies across the x axis
        boxes = BoxArrays(np.array([[5.0, 0.0, 0.0]]), np.array([[3.0, 0.1, 1.0]]), np.array([math.pi / 2]))
        assert segments_blocked(np.zeros(3), np.array([[10.0, 2.0, 0.0]]), boxes).tolist() == [True]

    def test_no_boxes(self):
        assert segments_blocked(np.zeros(3), np.ones((2, 3)), BoxArrays.empty()).tolist() == [False, False]

    def test_target_behind_wall_hidden(self):
        sensor = make_sensor()
        target = make_object(track_id=1, x=30.0)
        wall = make_object(track_id=2, x=15.0, dims=(2.0, 10.0, 10.0))
        assert not line_of_sight(target, [wall], sensor)
        assert line_of_sight(target, [], sensor)

    def test_partially_visible_target(self):
        sensor = make_sensor()
        target = make_object(track_id=1, x=30.0, y=0.0)
        narrow = make_object(track_id=2, x=15.0, y=0.0, dims=(1.0, 0.2, 0.2))
        assert line_of_sight(target, [narrow], sensor)


class TestMapDistance:
    """Distance to the nearest road square."""

    def test_on_road(self):
        road_map = highway_map(100.0, lane_count=1, lane_width=3.5)
        assert map_distance(StateVector(x=50.0, y=1.0, z=0.0), road_map) == 0.0

    def test_off_road(self):
        road_map = highway_map(100.0, lane_count=1, lane_width=3.5, margin=20.0, cell_size=0.5)
        # nearest road cell center is (50.25, 3.25)
        distance = map_distance(StateVector(x=50.25, y=10.25, z=0.0), road_map)
        assert distance == pytest.approx(7.0 - road_map.half_diagonal)

    def test_map_without_road(self):
        road_map = DigitalMap(
            origin=(0.0, 0.0), cell_size=1.0, grid=np.zeros((3, 3)), lanes=LaneGeometry(lane_count=1)
        )
        with pytest.raises(MapError):
            map_distance(StateVector(x=1.0, y=1.0, z=0.0), road_map)

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(1, 100), st.integers(1, 100), st.floats(0.5, 4.0), st.floats(0.05, 0.6),
        st.integers(0, 2**32 - 1), st.floats(0.0, 1.0), st.floats(0.0, 1.0),
    )
    def test_matches_brute_force_scan(self, rows, cols, cell_size, density, seed, u, v):
        grid = (np.random.default_rng(seed).random((rows, cols)) < density).astype(np.uint8)
        grid[rows // 2, cols // 2] = 1
        road_map = DigitalMap(
            origin=(-10.0, 5.0), cell_size=cell_size, grid=grid, lanes=LaneGeometry(lane_count=1)
        )
        # query anywhere in the grid plus a border of ten cells
        x = -10.0 + (u * (cols + 20) - 10) * cell_size
        y = 5.0 + (v * (rows + 20) - 10) * cell_size

        road_rows, road_cols = np.nonzero(grid)
        x_low = -10.0 + road_cols * cell_size
        y_low = 5.0 + road_rows * cell_size
        dx = np.maximum(np.maximum(x_low - x, x - (x_low + cell_size)), 0.0)
        dy = np.maximum(np.maximum(y_low - y, y - (y_low + cell_size)), 0.0)
        scanned = float(np.sqrt(dx ** 2 + dy ** 2).min())

        assert map_distance(StateVector(x=x, y=y, z=0.0), road_map) == pytest.approx(scanned, abs=cell_size)

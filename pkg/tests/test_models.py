"""Tests for the core value types, sensor metadata and the road map."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.models import (  # noqa: E402
    BeliefMass,
    Detection,
    DigitalMap,
    Dimensions,
    LaneGeometry,
    LedgerEntry,
    LocalObjectList,
    ObservationLedger,
    StateVector,
    highway_map,
    intersection_map,
    normalize_angle,
)
from tests.factories import make_object, make_sensor, make_system_object  # noqa: E402


def test_normalize_angle_half_open():
    assert normalize_angle(math.pi) == pytest.approx(-math.pi)
    assert normalize_angle(-math.pi) == pytest.approx(-math.pi)
    assert normalize_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert normalize_angle(0.25) == pytest.approx(0.25)


def test_dimensions_heading_wrapped():
    dims = Dimensions(length=4.5, width=1.8, height=1.5, heading=2 * math.pi + 0.5)
    assert dims.heading == pytest.approx(0.5)
    assert -math.pi <= dims.heading < math.pi


def test_dimensions_must_be_positive():
    with pytest.raises(ValidationError):
        Dimensions(length=0.0, width=1.8, height=1.5)


def test_state_vector_array_conversion():
    state = StateVector.from_array([1, 2, 3, 3, 4, 0])
    assert state.to_array().tolist() == [1.0, 2.0, 3.0, 3.0, 4.0, 0.0]
    assert state.speed == pytest.approx(5.0)
    with pytest.raises(ValidationError):
        StateVector(x=math.nan, y=0.0, z=0.0)


class TestCovarianceValidation:
    """Covariances must be 6x6, symmetric and positive semidefinite."""

    def test_valid_covariance_is_read_only(self):
        obj = make_object()
        with pytest.raises(ValueError):
            obj.covariance[0, 0] = 5.0

    def test_asymmetric_rejected(self):
        obj = make_object()
        covariance = np.eye(6)
        covariance[0, 1] = 0.1
        with pytest.raises(ValidationError, match="symmetric"):
            obj.__class__(**{**obj.__dict__, 'covariance': covariance})

    def test_indefinite_rejected(self):
        obj = make_object()
        covariance = np.eye(6)
        covariance[2, 2] = -1.0
        with pytest.raises(ValidationError, match="positive semidefinite"):
            obj.__class__(**{**obj.__dict__, 'covariance': covariance})

    def test_wrong_shape_rejected(self):
        obj = make_object()
        with pytest.raises(ValidationError, match="6x6"):
            obj.__class__(**{**obj.__dict__, 'covariance': np.eye(3)})


class TestLocalObjectList:
    """Consistency of per-step object lists."""

    def test_objects_sorted_by_key(self):
        objects = LocalObjectList(timestamp=0.0, objects={
            2: [make_object(sensor_id=2, track_id=1)],
            1: [make_object(sensor_id=1, track_id=7), make_object(sensor_id=1, track_id=3, x=60.0)],
        })
        assert [o.key for o in objects.all_objects()] == [(1, 3), (1, 7), (2, 1)]
        assert len(objects) == 3
        assert objects.for_sensor(5) == []

    def test_sensor_mismatch_rejected(self):
        with pytest.raises(ValidationError, match="filed under sensor"):
            LocalObjectList(timestamp=0.0, objects={2: [make_object(sensor_id=1)]})

    def test_timestamp_mismatch_rejected(self):
        with pytest.raises(ValidationError, match="differs"):
            LocalObjectList(timestamp=0.0, objects={1: [make_object(timestamp=0.1)]})

    def test_duplicate_track_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            LocalObjectList(timestamp=0.0, objects={1: [make_object(), make_object(x=80.0)]})


class TestBeliefMass:
    """Masses live on the simplex."""

    def test_sum_must_be_one(self):
        with pytest.raises(ValidationError, match="sum to 1"):
            BeliefMass(m_exists=0.5, m_not_exists=0.3, m_unknown=0.3)

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            BeliefMass(m_exists=-0.1, m_not_exists=0.6, m_unknown=0.5)

    def test_rounding_residue_absorbed(self):
        mass = BeliefMass(m_exists=-1e-14, m_not_exists=0.5, m_unknown=0.5)
        assert mass.m_exists == 0.0

    def test_vacuous(self):
        mass = BeliefMass.vacuous()
        assert mass.is_vacuous
        assert mass.to_array().tolist() == [0.0, 0.0, 1.0]


def test_system_object_existence_bounds():
    obj = make_system_object(p_exists=0.9)
    assert obj.p_exists - obj.s_exists >= 0
    with pytest.raises(ValidationError, match="p_exists - s_exists"):
        obj.__class__(**{**obj.__dict__, 'p_exists': 0.1, 's_exists': 0.3})
    with pytest.raises(ValidationError, match="p_exists \\+ s_exists"):
        obj.__class__(**{**obj.__dict__, 'p_exists': 0.9, 's_exists': 0.3})


def test_detection_noise_dimension_follows_range_rate():
    radar = Detection(
        sensor_id=1, timestamp=0.0, position=(10.0, 0.0, 0.0), radial_velocity=-3.0,
        noise=np.diag([0.25, 0.25, 0.25, 0.04]),
    )
    assert radar.measurement.tolist() == [10.0, 0.0, 0.0, -3.0]
    with pytest.raises(ValidationError):
        Detection(sensor_id=1, timestamp=0.0, position=(10.0, 0.0, 0.0), noise=np.eye(4))


class TestSensorMeta:
    """Derived tracker parameters of a sensor."""

    def test_default_confirmation_threshold(self):
        sensor = make_sensor(pd=0.9, pfa=1e-6)
        assert sensor.log_likelihood_ratio == pytest.approx(math.log(0.9 / 1e-6))
        assert sensor.confirmation == pytest.approx(1.5 * math.log(0.9 / 1e-6))

    def test_explicit_threshold_wins(self):
        assert make_sensor(confirmation_threshold=4.0).confirmation == 4.0

    def test_pd_must_exceed_pfa(self):
        with pytest.raises(ValidationError, match="false-alarm"):
            make_sensor(pd=0.1, pfa=0.2)

    def test_over_range(self):
        sensor = make_sensor(range_m=90.0, over_range_factor=1.5)
        assert sensor.over_range == pytest.approx(135.0)


class TestObservationLedger:
    """Per-step observation counts."""

    def test_register_and_totals(self):
        ledger = ObservationLedger(timestamp=0.0)
        ledger.register_regular(1)
        ledger.register_regular(1)
        ledger.register_unexpected(1)
        ledger.register_miss(2)

        assert ledger.entries[1].observations == 3
        assert ledger.entries[2] == LedgerEntry(misses=1)
        totals = ledger.totals()
        assert (totals.regular, totals.unexpected, totals.misses) == (2, 1, 1)


class TestDigitalMap:
    """Occupancy grid queries."""

    def test_highway_road_cells(self):
        road_map = highway_map(100.0, lane_count=2, lane_width=3.5, margin=10.0, cell_size=0.5)
        assert road_map.is_road(50.0, 3.0)
        assert not road_map.is_road(50.0, 8.0)
        assert not road_map.is_road(-5.0, 3.0)
        assert road_map.cell_of(500.0, 0.0) is None
        assert road_map.extent == pytest.approx((-10.0, 110.0, -10.0, 17.0))

    def test_intersection_arms(self):
        road_map = intersection_map(arm_length=40.0, lanes_per_direction=2, lane_width=3.5, sidewalk_width=2.0)
        assert road_map.is_road(0.0, 0.0)
        assert road_map.is_road(-35.0, 5.0)
        assert road_map.is_road(5.0, 35.0)
        assert not road_map.is_road(-30.0, -30.0)

    def test_grid_values_validated(self):
        with pytest.raises(ValidationError, match="0 or 1"):
            DigitalMap(origin=(0.0, 0.0), cell_size=1.0, grid=[[0, 2]], lanes=LaneGeometry(lane_count=1))

    def test_road_cell_centers(self):
        road_map = DigitalMap(
            origin=(0.0, 0.0), cell_size=1.0, grid=[[0, 1], [0, 0]], lanes=LaneGeometry(lane_count=1)
        )
        assert road_map.road_cell_centers().tolist() == [[1.5, 0.5]]

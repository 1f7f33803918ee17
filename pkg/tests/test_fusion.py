"""Tests for clustering, merging, frame association and the fusion step."""

import sys
from itertools import combinations, permutations
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.fusion import (  # noqa: E402
    FusionConfig,
    FusionEngine,
    FusionState,
    associate_frames,
    cluster,
    fuse_step,
    merge,
    t2t_distance,
)
from src.models import highway_map  # noqa: E402
from src.tracking.config import chi2_gate  # noqa: E402
from tests.factories import HIT_SCORE, make_object, make_sensor, make_system_object, object_list  # noqa: E402

LANE_CENTER = 1.75


@pytest.fixture
def road_map():
    return highway_map(200.0, lane_count=1)


@pytest.fixture
def facing_sensors():
    """Two sensors 80 m apart looking at each other along the lane."""
    return [
        make_sensor(sensor_id=1, position=(0.0, LANE_CENTER, 0.75), yaw_deg=0.0),
        make_sensor(sensor_id=2, position=(80.0, LANE_CENTER, 0.75), yaw_deg=180.0),
    ]


def target(sensor_id: int, x: float = 40.0, y: float = LANE_CENTER, **kwargs):
    return make_object(sensor_id=sensor_id, x=x, y=y, **kwargs)


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partial in set_partitions(rest):
        yield [[first], *partial]
        for i in range(len(partial)):
            yield [*partial[:i], [first, *partial[i]], *partial[i + 1:]]


def best_partition(tracks, gate):
    """Fewest clusters with every member pair inside the gate, then least intra-cluster distance."""
    best = None
    for partition in set_partitions(tracks):
        total = 0.0
        valid = True
        for group in partition:
            if len({t.sensor_id for t in group}) != len(group):
                valid = False
                break
            for a, b in combinations(group, 2):
                distance = t2t_distance(a, b)
                if distance > gate:
                    valid = False
                    break
                total += distance
            if not valid:
                break
        if valid and (best is None or (len(partition), total) < best[0]):
            best = ((len(partition), total), partition)
    return sorted(sorted(t.key for t in group) for group in best[1])


class TestClustering:
    """Track-to-track grouping."""

    def test_identical_tracks_have_zero_distance(self):
        assert t2t_distance(target(1), target(2)) == pytest.approx(0.0)

    def test_two_sensors_one_cluster(self):
        clusters = cluster(object_list([target(1), target(2, x=40.5)]))
        assert len(clusters) == 1
        assert clusters[0].sensor_ids == frozenset({1, 2})

    def test_distant_tracks_stay_apart(self):
        clusters = cluster(object_list([target(1), target(2, x=90.0)]))
        assert [c.sensor_ids for c in clusters] == [frozenset({1}), frozenset({2})]

    def test_never_two_tracks_of_one_sensor(self):
        objects = object_list([
            target(1, track_id=1),
            target(1, track_id=2, x=40.3),
            target(2, track_id=1, x=40.1),
        ])
        clusters = cluster(objects)
        assert len(clusters) == 2
        for track_cluster in clusters:
            sensor_ids = [m.sensor_id for m in track_cluster.members]
            assert len(sensor_ids) == len(set(sensor_ids))

    def test_tentative_tracks_ignored(self):
        assert cluster(object_list([target(1, confirmed=False)])) == []

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-0.5, 0.5), min_size=18, max_size=18))
    def test_matches_partition_enumeration(self, jitter):
        tracks = []
        for index, (sensor_id, x) in enumerate((s, x) for x in (40.0, 60.0) for s in (1, 2, 3)):
            dx, dy, dv = jitter[3 * index:3 * index + 3]
            tracks.append(make_object(
                sensor_id=sensor_id, track_id=1 if x < 50 else 2, x=x + dx, y=LANE_CENTER + dy, vx=dv
            ))

        clusters = cluster(object_list(tracks))

        expected = best_partition(tracks, chi2_gate(0.99, 6))
        assert sorted(sorted(m.key for m in c.members) for c in clusters) == expected
        assert [len(c.members) for c in clusters] == [3, 3]


def test_merge_information_weighting():
    estimate = merge([target(1, x=40.0), target(2, x=42.0, dims=(5.0, 1.7, 1.6))])
    assert estimate.state.x == pytest.approx(41.0)
    assert estimate.covariance == pytest.approx(np.eye(6) * 0.125)
    assert (estimate.dims.length, estimate.dims.width, estimate.dims.height) == (5.0, 1.8, 1.6)
    assert not estimate.status.coasting


def test_merge_empty_rejected():
    with pytest.raises(ValueError):
        merge([])


class TestFrameAssociation:
    """Persistent global ids."""

    def test_ids_follow_predicted_motion(self):
        state = FusionState()
        still = make_system_object(x=40.0, global_id=7)
        moving = still.model_copy(update={'state': still.state.model_copy(update={'vx': 20.0})})
        current = [make_system_object(x=46.0, timestamp=0.3, global_id=-1)]
        # predicted to 46 m; a position gate of 5 m would reject the unpredicted distance
        associated = associate_frames(current, [moving], state)
        assert associated[0].global_id == 7

    def test_unmatched_get_fresh_ids(self):
        state = FusionState()
        current = [make_system_object(x=40.0, global_id=-1), make_system_object(x=90.0, global_id=-1)]
        associated = associate_frames(current, [], state)
        assert [obj.global_id for obj in associated] == [1, 2]
        assert state.next_global_id == 3

    @settings(max_examples=60, deadline=None)
    @given(
        st.permutations([0, 1, 2]),
        st.lists(st.floats(-15.0, 15.0), min_size=3, max_size=3),
        st.lists(st.floats(-0.5, 0.5), min_size=3, max_size=3),
    )
    def test_matches_exhaustive_assignment(self, order, speeds, noise):
        previous = []
        for k in range(3):
            still = make_system_object(x=20.0 * (k + 1), global_id=k + 10)
            previous.append(still.model_copy(update={'state': still.state.model_copy(update={'vx': speeds[k]})}))
        current = [
            make_system_object(x=20.0 * (k + 1) + 0.1 * speeds[k] + noise[k], timestamp=0.1, global_id=-1)
            for k in order
        ]
        predicted = [p.state.x + 0.1 * p.state.vx for p in previous]

        def total(assignment):
            return sum(abs(current[i].state.x - predicted[j]) for i, j in enumerate(assignment))

        expected = min(permutations(range(3)), key=lambda a: (total(a), a))
        associated = associate_frames(current, previous, FusionState())
        assert [obj.global_id for obj in associated] == [previous[j].global_id for j in expected]
        assert [obj.global_id for obj in associated] == [k + 10 for k in order]


class TestFuseStep:
    """Plausibilization of one synchronous step."""

    def test_redundant_confirmation(self, facing_sensors, road_map):
        objects = object_list([target(1), target(2)])
        system_objects, ledger = fuse_step(objects, facing_sensors, road_map, None, FusionState())

        assert len(system_objects) == 1
        fused = system_objects[0]
        assert fused.contributors == frozenset({1, 2})
        # two sensors at (0.891, 0.009, 0.1) each
        assert fused.p_exists == pytest.approx(0.99301, abs=1e-4)
        assert ledger.entries[1].regular == 1
        assert ledger.entries[2].regular == 1
        assert ledger.totals().misses == 0

    def test_single_sensor_without_counterpart(self, road_map):
        sensors = [
            make_sensor(sensor_id=1, position=(0.0, LANE_CENTER, 0.75)),
            make_sensor(sensor_id=2, position=(80.0, LANE_CENTER, 0.75), yaw_deg=0.0),
        ]
        system_objects, ledger = fuse_step(object_list([target(1)]), sensors, road_map, None, FusionState())
        # sensor 2 looks away: its vacuous mass leaves sensor 1's BBA unchanged
        assert system_objects[0].p_exists == pytest.approx(0.941, abs=1e-6)
        assert ledger.totals().misses == 0

    def test_miss_lowers_existence(self, facing_sensors, road_map):
        system_objects, ledger = fuse_step(
            object_list([target(1)]), facing_sensors, road_map, None, FusionState()
        )
        assert ledger.entries[2].misses == 1
        assert ledger.entries[2].observations == 0
        assert system_objects[0].p_exists == pytest.approx(0.475, abs=1e-3)
        assert system_objects[0].p_exists < 0.5

    def test_unexpected_report_is_ignorance(self, facing_sensors, road_map):
        system_objects, ledger = fuse_step(
            object_list([target(1, x=150.0)]), facing_sensors, road_map, None, FusionState()
        )
        assert ledger.entries[1].unexpected == 1
        assert system_objects[0].p_exists == pytest.approx(0.5)
        assert system_objects[0].s_exists == pytest.approx(0.5)

    def test_existence_bounds_hold(self, facing_sensors, road_map):
        objects = object_list([target(1), target(2), target(1, track_id=2, x=10.0, y=30.0)])
        system_objects, _ = fuse_step(objects, facing_sensors, road_map, None, FusionState())
        for obj in system_objects:
            assert obj.p_exists - obj.s_exists >= -1e-12
            assert obj.p_exists + obj.s_exists <= 1.0 + 1e-12


class TestFusionEngine:
    """State across steps."""

    def test_global_id_persists(self, facing_sensors, road_map):
        engine = FusionEngine(facing_sensors, road_map)
        first, _, _ = engine.step(object_list([target(1), target(2)]))
        second, _, _ = engine.step(object_list([
            target(1, x=40.5, timestamp=0.1),
            target(2, x=40.5, timestamp=0.1),
        ], timestamp=0.1))
        assert first[0].global_id == second[0].global_id == 1

    def test_coasting_cluster_cannot_gain_existence(self, facing_sensors, road_map):
        engine = FusionEngine(facing_sensors, road_map)
        first, _, _ = engine.step(object_list([target(1, score=HIT_SCORE), target(2, score=HIT_SCORE)]))
        second, ledger, _ = engine.step(object_list([
            target(1, coasting=True, timestamp=0.1),
            target(2, coasting=True, timestamp=0.1),
        ], timestamp=0.1))

        assert second[0].status.coasting
        assert second[0].mass.m_exists == pytest.approx(first[0].mass.m_exists)
        # coasting although in clear view: logged as an observation and a miss
        assert ledger.entries[1].regular == 1
        assert ledger.entries[1].misses == 1

    def test_existence_smoothing_blends_frames(self, facing_sensors, road_map):
        both = object_list([target(1), target(2)])
        alone = object_list([target(1, x=40.5, timestamp=0.1)], timestamp=0.1)

        plain = FusionEngine(facing_sensors, road_map)
        first, _, _ = plain.step(both)
        raw, _, _ = plain.step(alone)

        smoothed = FusionEngine(facing_sensors, road_map, FusionConfig(smooth_existence=True))
        smoothed.step(both)
        blended, _, _ = smoothed.step(alone)

        assert blended[0].global_id == raw[0].global_id
        assert blended[0].p_exists == pytest.approx(0.5 * (first[0].p_exists + raw[0].p_exists))
        assert blended[0].p_exists > raw[0].p_exists

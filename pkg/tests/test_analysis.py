"""Tests for interval metrics, confidence intervals and fault diagnosis."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.analysis import (  # noqa: E402
    BinSpec,
    ConfidenceInterval,
    FaultClassHypothesis,
    Flag,
    IntervalStats,
    SensorRatios,
    confidence_interval,
    diagnose,
    interval_metrics,
    recording_metrics,
    sensor_baseline,
    sensor_neighbors,
)
from src.analysis.diagnosis import local_bins, sensor_footprints  # noqa: E402
from src.analysis.metrics import BinMean, interval_rows  # noqa: E402
from src.exceptions import InsufficientDataError  # noqa: E402
from src.simulation.config import load_scenario, parse_scenario  # noqa: E402
from src.simulation.runner import Recording, RecordingHeader  # noqa: E402
from tests.factories import make_step, make_system_object, scenario_yaml  # noqa: E402

HIGHWAY = Path(__file__).parent.parent / 'config' / 'scenarios' / 'highway.yaml'
ANALYSED = [2, 3, 4, 5]
BINS = BinSpec('longitudinal', 25.0)

# (misses, observations) cycles around MR 0.1 and 0.3
NORMAL = [(10, 90), (9, 91), (11, 89)]
HIGH_MR = [(30, 70), (29, 71), (31, 69)]
LOW_MR = [(2, 98), (1, 99), (3, 97)]


def ratios(pattern, index: int, unexpected: int = 9) -> SensorRatios:
    misses, observations = pattern[index % 3]
    return SensorRatios(misses=misses, observations=observations, unexpected=unexpected)


def synthetic_stats(
    high_mr=(),
    low_uor=(),
    low_mr=(),
    bins=None,
    n: int = 12
):
    """Interval statistics of the analysed sensors; UOR stays near 0.1 unless lowered."""
    stats = []
    for index in range(n):
        sensors = {}
        for sensor_id in ANALYSED:
            pattern = HIGH_MR if sensor_id in high_mr else LOW_MR if sensor_id in low_mr else NORMAL
            observations = pattern[index % 3][1]
            unexpected = 1 if sensor_id in low_uor else round(0.1 * observations)
            sensors[sensor_id] = ratios(pattern, index, unexpected)
        interval_bins = {
            label: BinMean(mean=mean + 0.01 * (index % 3 - 1), samples=20)
            for label, mean in (bins or {}).items()
        }
        stats.append(IntervalStats(
            index=index, start=5.0 * index, end=5.0 * index + 4.9, sensors=sensors, bins=interval_bins
        ))
    return stats


@pytest.fixture(scope='module')
def highway():
    config = load_scenario(HIGHWAY)
    return config.sensor_metas(), config.build_map()


class TestMetrics:
    """Ledger aggregation per interval."""

    def test_sensor_ratios(self):
        records = [
            make_step(0, counts={1: (7, 3, 2)}),
            make_step(1, counts={1: (7, 3, 3)}),
        ]
        stats = interval_metrics(records, BINS, sensors=[1, 2])
        assert stats.sensors[1].mr == pytest.approx(0.2)
        assert stats.sensors[1].uor == pytest.approx(0.3)
        # a sensor absent from the ledgers has no defined ratios
        assert stats.sensors[2].mr is None
        assert stats.sensors[2].uor is None
        assert (stats.start, stats.end) == (0.0, 0.1)

    def test_ratios_undefined_without_samples(self):
        assert SensorRatios(misses=3, observations=0, unexpected=0).mr == 1.0
        assert SensorRatios(misses=3, observations=0, unexpected=0).uor is None

    def test_p_exists_bins(self):
        records = [
            make_step(0, system_objects=[make_system_object(x=40.0, p_exists=0.9),
                                         make_system_object(x=80.0, p_exists=0.5, global_id=2)]),
            make_step(1, system_objects=[make_system_object(x=45.0, p_exists=0.7)]),
        ]
        stats = interval_metrics(records, BINS)
        assert list(stats.bins) == ['1', '3']
        assert stats.bins['1'].mean == pytest.approx(0.8)
        assert stats.bins['1'].samples == 2
        assert stats.bins['3'].mean == pytest.approx(0.5)

    def test_grid_labels(self):
        spec = BinSpec('grid', 10.0)
        assert spec.label(-5.0, 12.0) == "-1:1"
        assert spec.center("-1:1") == (-5.0, 15.0)
        assert BINS.center("2") == (62.5, None)

    def test_invalid_bin_spec(self):
        with pytest.raises(ValueError):
            BinSpec('hexagonal', 10.0)
        with pytest.raises(ValueError):
            BinSpec('grid', 0.0)

    def test_recording_metrics_uses_complete_intervals(self):
        header = RecordingHeader.for_config(parse_scenario(scenario_yaml(duration=2.5)))
        recording = Recording(header, [make_step(i, counts={1: (9, 0, 1), 2: (10, 0, 0)}) for i in range(25)])
        stats = recording_metrics(recording)
        assert [s.index for s in stats] == [0, 1]
        assert stats[0].sensors[1].mr == pytest.approx(0.1)
        assert stats[1].sensors[2].mr == 0.0

    def test_interval_rows(self):
        stats = interval_metrics([make_step(0, counts={1: (4, 1, 0)},
                                            system_objects=[make_system_object()])], BINS)
        rows = interval_rows([stats])
        assert {(r.get('sensor_id'), r.get('bin_id'), r['metric']) for r in rows} == {
            (1, None, 'mr'), (1, None, 'uor'), (None, '1', 'p_exists')
        }
        uor = next(r for r in rows if r['metric'] == 'uor')
        assert uor['mean'] == pytest.approx(0.2)
        assert uor['samples'] == 5


class TestStatistics:
    """Student-t intervals and the WLS baseline."""

    def test_confidence_interval(self):
        ci = confidence_interval([0.1, None, 0.2, 0.3])
        assert ci.mean == pytest.approx(0.2)
        assert ci.half_width == pytest.approx(0.2484, abs=1e-4)
        assert ci.variance == pytest.approx(0.01 / 3)
        assert ci.samples == 3

    def test_confidence_interval_needs_two_values(self):
        with pytest.raises(InsufficientDataError):
            confidence_interval([0.1, None])

    def test_wls_baseline(self):
        baseline = sensor_baseline([
            ConfidenceInterval(mean=0.1, half_width=0.1, variance=0.01, samples=10),
            ConfidenceInterval(mean=0.3, half_width=0.2, variance=0.04, samples=10),
        ])
        assert baseline.mean == pytest.approx(0.14)
        assert baseline.variance == pytest.approx(0.008)
        assert baseline.samples == 20

    def test_exact_estimates_dominate(self):
        baseline = sensor_baseline([
            ConfidenceInterval(mean=0.0, half_width=0.0, variance=0.0, samples=10),
            ConfidenceInterval(mean=0.3, half_width=0.2, variance=0.04, samples=10),
        ])
        assert (baseline.mean, baseline.half_width) == (0.0, 0.0)

    def test_baseline_needs_sensors(self):
        single = [ConfidenceInterval(mean=0.1, half_width=0.1, variance=0.01, samples=10)]
        with pytest.raises(InsufficientDataError):
            sensor_baseline(single)
        assert sensor_baseline(single, min_sensors=1).mean == pytest.approx(0.1)

    def test_interval_ordering(self):
        low = ConfidenceInterval(mean=0.1, half_width=0.05, variance=0.001, samples=10)
        high = ConfidenceInterval(mean=0.3, half_width=0.05, variance=0.001, samples=10)
        assert high.above(low) and low.below(high)
        assert not low.overlaps(high)
        assert low.overlaps(low)


class TestNeighbourhoods:
    """Shared road coverage on the six-radar highway."""

    def test_chain_neighbours(self, highway):
        sensors, road_map = highway
        neighbors = sensor_neighbors(sensors, road_map)
        assert {3, 5} <= neighbors[4]
        assert 2 not in neighbors[4]
        assert all(a in neighbors[b] for a in neighbors for b in neighbors[a])

    def test_local_bins_follow_coverage(self, highway):
        sensors, road_map = highway
        footprint = sensor_footprints(sensors, road_map)[3]
        nearby = local_bins(footprint, road_map, BINS)
        assert '8' in nearby
        assert '1' not in nearby


class TestDiagnosis:
    """Fingerprint matching."""

    def run(self, highway, stats, reference=None):
        sensors, road_map = highway
        return diagnose(stats, sensors, road_map, BINS, analysed=ANALYSED, reference=reference)

    def test_no_fault(self, highway):
        report = self.run(highway, synthetic_stats())
        assert report.verdict is FaultClassHypothesis.NO_FAULT
        assert report.flags() == {sid: [] for sid in ANALYSED}
        assert report.suspect_sensor is None

    def test_misoriented_sensor(self, highway):
        report = self.run(highway, synthetic_stats(high_mr={4}, low_uor={4}))
        assert report.verdict is FaultClassHypothesis.MISORIENTED_POSE
        assert report.suspect_sensor == 4
        assert report.fault_class == 1
        assert set(report.flags()[4]) == {Flag.MR_HIGH.value, Flag.UOR_LOW.value}
        assert "no reference run: local p_exists dip not checked" in report.notes

    def test_tracker_parametrization(self, highway):
        report = self.run(highway, synthetic_stats(high_mr={3, 5}))
        assert report.verdict is FaultClassHypothesis.TRACKER_PARAMETRIZATION
        assert report.suspect_sensor == 4
        assert report.fault_class == 2

    def test_blind_spot_cross_sensor(self, highway):
        report = self.run(highway, synthetic_stats(high_mr={3}))
        assert report.verdict is FaultClassHypothesis.BLIND_SPOT
        assert report.suspect_sensor == 3

    def test_blind_spot_confirmed_by_local_dip(self, highway):
        reference = synthetic_stats(bins={'1': 0.9, '8': 0.9})
        stats = synthetic_stats(high_mr={3}, bins={'1': 0.9, '8': 0.6})
        report = self.run(highway, stats, reference)
        assert report.mode == 'reference'
        assert report.verdict is FaultClassHypothesis.BLIND_SPOT
        assert report.suspect_sensor == 3
        assert report.flags()[3] == [Flag.MR_HIGH.value]
        assert {b.bin_id: b.flag for b in report.bins} == {'1': None, '8': Flag.P_EXISTS_LOW}

    def test_dip_elsewhere_is_inconclusive(self, highway):
        reference = synthetic_stats(bins={'1': 0.9, '8': 0.9})
        stats = synthetic_stats(high_mr={3}, bins={'1': 0.6, '8': 0.9})
        report = self.run(highway, stats, reference)
        assert report.verdict is FaultClassHypothesis.INCONCLUSIVE
        assert report.suspect_sensor is None
        assert any("no local p_exists dip around sensor 3" in note for note in report.notes)

    def test_lone_low_mr_is_no_fault(self, highway):
        report = self.run(highway, synthetic_stats(low_mr={2}), reference=synthetic_stats())
        assert report.flags()[2] == [Flag.MR_LOW.value]
        assert report.verdict is FaultClassHypothesis.NO_FAULT
        assert report.suspect_sensor is None
        assert any("MR-low/UOR-high only on sensors [2]" in note for note in report.notes)

    def test_unmatched_pattern_is_inconclusive(self, highway):
        report = self.run(highway, synthetic_stats(high_mr={2, 5}))
        assert report.verdict is FaultClassHypothesis.INCONCLUSIVE
        assert report.fault_class is None

    def test_insufficient_intervals(self, highway):
        with pytest.raises(InsufficientDataError, match="insufficient intervals"):
            self.run(highway, synthetic_stats(n=5))

    def test_report_serializes(self, highway):
        data = self.run(highway, synthetic_stats(high_mr={3})).to_dict()
        assert data['schema_version'] == 1
        assert data['verdict'] == "pollution/blind spot"
        assert data['flags']['3'] == ["MR-high"]

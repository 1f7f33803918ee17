"""
Fault diagnosis from interval statistics.

Each analysed sensor's MR and UOR confidence intervals are compared with a
baseline: the WLS average of the other analysed sensors (cross-sensor mode)
or of a no-fault reference run. A flag is raised only when the intervals are
disjoint. Flag patterns are then matched against the known fault fingerprints:

    misoriented sensor pose     affected sensor MR-high and UOR-low
    tracker parametrization     neighbours of the affected sensor MR-high, UOR flat
    pollution / blind spot      affected sensor MR-high

A local p_exists dip around the suspect is required whenever a reference run
provides per-bin intervals. MR-low and UOR-high take no part in any
fingerprint; on their own they leave the verdict at no fault. Any other
flag pattern is reported as inconclusive.
"""

import logging
from enum import Enum
from typing import Dict, List, Literal, Optional, Sequence, Set

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.analysis.metrics import BinSpec, IntervalStats, bin_sort_key
from src.analysis.statistics import ConfidenceInterval, confidence_interval, sensor_baseline
from src.exceptions import InsufficientDataError
from src.models.geometry import fov_mask
from src.models.road_map import DigitalMap
from src.models.sensor import SensorMeta
from src.storage.base import OUTPUT_SCHEMA_VERSION

logger = logging.getLogger(__name__)

METRICS = ('mr', 'uor')
# road cells are tested at the height of a typical object center
FOOTPRINT_HEIGHT = 0.75


class Flag(str, Enum):
    MR_HIGH = "MR-high"
    MR_LOW = "MR-low"
    UOR_HIGH = "UOR-high"
    UOR_LOW = "UOR-low"
    P_EXISTS_LOW = "p_exists-low"
    P_EXISTS_HIGH = "p_exists-high"


class FaultClassHypothesis(str, Enum):
    NO_FAULT = "no fault"
    MISORIENTED_POSE = "misoriented sensor pose"
    TRACKER_PARAMETRIZATION = "tracker parametrization"
    BLIND_SPOT = "pollution/blind spot"
    INCONCLUSIVE = "inconclusive"

    @property
    def fault_class(self) -> Optional[int]:
        return {
            FaultClassHypothesis.MISORIENTED_POSE: 1,
            FaultClassHypothesis.TRACKER_PARAMETRIZATION: 2,
            FaultClassHypothesis.BLIND_SPOT: 3,
        }.get(self)

    @property
    def is_fault(self) -> bool:
        return self.fault_class is not None


class MetricComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric: str
    interval: Optional[ConfidenceInterval] = None
    baseline: Optional[ConfidenceInterval] = None
    flag: Optional[Flag] = None


class SensorDiagnosis(BaseModel):
    sensor_id: int
    neighbors: List[int] = Field(default_factory=list)
    comparisons: List[MetricComparison] = Field(default_factory=list)

    @property
    def flags(self) -> List[Flag]:
        return [c.flag for c in self.comparisons if c.flag is not None]


class BinDiagnosis(BaseModel):
    bin_id: str
    interval: ConfidenceInterval
    reference: Optional[ConfidenceInterval] = None
    flag: Optional[Flag] = None


class DiagnosisReport(BaseModel):
    """Flags per sensor and bin, with the matched fault-class hypothesis."""

    schema_version: int = OUTPUT_SCHEMA_VERSION
    mode: Literal['cross-sensor', 'reference']
    intervals: int
    confidence: float
    sensors: List[SensorDiagnosis]
    bins: List[BinDiagnosis] = Field(default_factory=list)
    verdict: FaultClassHypothesis
    suspect_sensor: Optional[int] = None
    fault_class: Optional[int] = None
    notes: List[str] = Field(default_factory=list)

    @property
    def is_fault(self) -> bool:
        return self.verdict.is_fault

    def flags(self) -> Dict[int, List[str]]:
        return {s.sensor_id: [f.value for f in s.flags] for s in self.sensors}

    def to_dict(self) -> dict:
        data = self.model_dump(mode='json')
        data['flags'] = {str(k): v for k, v in self.flags().items()}
        return data


def sensor_footprints(sensors: Sequence[SensorMeta], road_map: DigitalMap) -> Dict[int, np.ndarray]:
    """Per sensor, a mask over the map's road cells lying inside its FoV."""
    centers = road_map.road_cell_centers()
    points = np.column_stack([centers, np.full(len(centers), FOOTPRINT_HEIGHT)]) if len(centers) else np.zeros((0, 3))
    return {
        sensor.sensor_id: fov_mask(points, sensor) if len(points) else np.zeros(0, dtype=bool)
        for sensor in sensors
    }


def sensor_neighbors(
    sensors: Sequence[SensorMeta],
    road_map: DigitalMap,
    footprints: Optional[Dict[int, np.ndarray]] = None
) -> Dict[int, Set[int]]:
    """Two sensors are neighbours when at least one road cell lies inside both FoVs."""
    footprints = footprints if footprints is not None else sensor_footprints(sensors, road_map)
    ids = sorted(footprints)
    neighbors: Dict[int, Set[int]] = {sensor_id: set() for sensor_id in ids}
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if np.any(footprints[a] & footprints[b]):
                neighbors[a].add(b)
                neighbors[b].add(a)
    return neighbors


def local_bins(footprint: np.ndarray, road_map: DigitalMap, bin_spec: BinSpec) -> Set[str]:
    centers = road_map.road_cell_centers()[footprint]
    return set(bin_spec.labels(centers)) if len(centers) else set()


def _sensor_intervals(
    stats: Sequence[IntervalStats],
    sensors: Sequence[int],
    metric: str,
    confidence: float
) -> Dict[int, ConfidenceInterval]:
    result = {}
    for sensor_id in sensors:
        try:
            result[sensor_id] = confidence_interval(
                (s.ratio_series(sensor_id, metric) for s in stats), confidence
            )
        except InsufficientDataError:
            logger.warning(f"Sensor {sensor_id}: too few valid {metric.upper()} interval means, left unflagged")
    return result


def _bin_intervals(stats: Sequence[IntervalStats], confidence: float) -> Dict[str, ConfidenceInterval]:
    labels = sorted({label for s in stats for label in s.bins}, key=bin_sort_key)
    result = {}
    for label in labels:
        values = [s.bins[label].mean for s in stats if label in s.bins]
        if len(values) >= 2:
            result[label] = confidence_interval(values, confidence)
    return result


def _flag(metric: str, interval: ConfidenceInterval, baseline: ConfidenceInterval) -> Optional[Flag]:
    if interval.above(baseline):
        return Flag(f"{metric.upper()}-high")
    if interval.below(baseline):
        return Flag(f"{metric.upper()}-low")
    return None


def _match(
    sensors: Dict[int, SensorDiagnosis],
    neighbors: Dict[int, Set[int]]
) -> Optional[tuple]:
    """(hypothesis, suspect) for the first fingerprint that fits uniquely; None otherwise."""
    mr_high = {sid for sid, d in sensors.items() if Flag.MR_HIGH in d.flags}
    uor_low = {sid for sid, d in sensors.items() if Flag.UOR_LOW in d.flags}

    # Class 1: the sensor itself misses more and reports fewer unexpected objects
    # 클래스 1: 해당 센서의 MR 상승과 UOR 하락
    misoriented = mr_high & uor_low
    if len(misoriented) == 1:
        return FaultClassHypothesis.MISORIENTED_POSE, next(iter(misoriented))

    # Class 2: every neighbour misses more, the sensor itself does not look odd
    # 클래스 2: 이웃 센서 모두 MR 상승, 해당 센서의 UOR 변화 없음
    candidates = []
    for sensor_id in sorted(sensors):
        around = neighbors.get(sensor_id, set()) & set(sensors)
        if len(around) < 2 or not around <= mr_high:
            continue
        if sensor_id in uor_low:
            continue
        if mr_high - around - {sensor_id}:
            continue
        candidates.append(sensor_id)
    if len(candidates) == 1:
        return FaultClassHypothesis.TRACKER_PARAMETRIZATION, candidates[0]

    # Class 3: a single sensor misses more
    # 클래스 3: 단일 센서의 MR 상승
    if len(mr_high) == 1 and not uor_low:
        return FaultClassHypothesis.BLIND_SPOT, next(iter(mr_high))
    return None


def diagnose(
    stats: Sequence[IntervalStats],
    sensors: Sequence[SensorMeta],
    road_map: DigitalMap,
    bin_spec: BinSpec,
    analysed: Optional[Sequence[int]] = None,
    reference: Optional[Sequence[IntervalStats]] = None,
    confidence: float = 0.95,
    min_intervals: int = 10
) -> DiagnosisReport:
    """
    Flag sensors whose MR/UOR intervals separate from the baseline and match a fault class.

    Args:
        stats: Interval statistics of the run under test
        sensors: Nominal metadata of all sensors of the run
        road_map: Map used for neighbourhoods and local bins
        bin_spec: Binning used to compute the statistics
        analysed: Sensors included in the statistics; all when None
        reference: Interval statistics of a no-fault run; cross-sensor mode when None
        confidence: Confidence level of every interval
        min_intervals: Minimum number of intervals

    Raises:
        InsufficientDataError: Too few intervals, or fewer than two usable sensors
    """
    if len(stats) < min_intervals:
        raise InsufficientDataError(f"insufficient intervals: {len(stats)} < {min_intervals}")
    if reference is not None and len(reference) < 2:
        raise InsufficientDataError(f"insufficient reference intervals: {len(reference)}")

    analysed = sorted(analysed) if analysed is not None else sorted(s.sensor_id for s in sensors)
    footprints = sensor_footprints(sensors, road_map)
    neighbors = sensor_neighbors(sensors, road_map, footprints)
    mode = 'cross-sensor' if reference is None else 'reference'
    notes: List[str] = []

    diagnoses = {
        sensor_id: SensorDiagnosis(sensor_id=sensor_id, neighbors=sorted(neighbors.get(sensor_id, set()) & set(analysed)))
        for sensor_id in analysed
    }
    for metric in METRICS:
        own = _sensor_intervals(stats, analysed, metric, confidence)
        if len(own) < 2:
            raise InsufficientDataError(f"need at least 2 sensors with valid {metric.upper()} intervals")
        shared: Optional[ConfidenceInterval] = None
        if reference is not None:
            ref = _sensor_intervals(reference, analysed, metric, confidence)
            shared = sensor_baseline(list(ref.values()), confidence)

        for sensor_id in analysed:
            interval = own.get(sensor_id)
            if interval is None:
                diagnoses[sensor_id].comparisons.append(MetricComparison(metric=metric))
                continue
            if shared is not None:
                baseline = shared
            else:
                others = [ci for sid, ci in own.items() if sid != sensor_id]
                baseline = sensor_baseline(others, confidence, min_sensors=1)
            diagnoses[sensor_id].comparisons.append(MetricComparison(
                metric=metric,
                interval=interval,
                baseline=baseline,
                flag=_flag(metric, interval, baseline),
            ))

    bins: List[BinDiagnosis] = []
    ref_bins = _bin_intervals(reference, confidence) if reference is not None else {}
    for label, interval in _bin_intervals(stats, confidence).items():
        ref_interval = ref_bins.get(label)
        flag = None
        if ref_interval is not None:
            if interval.below(ref_interval):
                flag = Flag.P_EXISTS_LOW
            elif interval.above(ref_interval):
                flag = Flag.P_EXISTS_HIGH
        bins.append(BinDiagnosis(bin_id=label, interval=interval, reference=ref_interval, flag=flag))

    # Only MR-high and UOR-low belong to a fingerprint. MR-low and UOR-high are
    # kept in the report but alone they do not make a run suspicious.
    indicative = {
        sid for sid, d in diagnoses.items()
        if Flag.MR_HIGH in d.flags or Flag.UOR_LOW in d.flags
    }
    benign = sorted(sid for sid, d in diagnoses.items() if d.flags and sid not in indicative)
    if benign:
        notes.append(f"MR-low/UOR-high only on sensors {benign}; not part of any fault fingerprint")
    matched = _match(diagnoses, neighbors)
    suspect = None
    if not indicative:
        verdict = FaultClassHypothesis.NO_FAULT
        if any(b.flag is not None for b in bins):
            verdict = FaultClassHypothesis.INCONCLUSIVE
            notes.append("p_exists deviates from the reference without sensor flags")
    elif matched is None:
        verdict = FaultClassHypothesis.INCONCLUSIVE
        notes.append("flag pattern matches no known fault fingerprint")
    else:
        verdict, suspect = matched
        if ref_bins:
            nearby = local_bins(footprints[suspect], road_map, bin_spec)
            if not any(b.flag is Flag.P_EXISTS_LOW and b.bin_id in nearby for b in bins):
                notes.append(f"no local p_exists dip around sensor {suspect}; {verdict.value} not confirmed")
                verdict, suspect = FaultClassHypothesis.INCONCLUSIVE, None
        else:
            notes.append("no reference run: local p_exists dip not checked")

    report = DiagnosisReport(
        mode=mode,
        intervals=len(stats),
        confidence=confidence,
        sensors=[diagnoses[sid] for sid in analysed],
        bins=bins,
        verdict=verdict,
        suspect_sensor=suspect,
        fault_class=verdict.fault_class,
        notes=notes,
    )
    logger.info(f"Diagnosis over {len(stats)} intervals ({mode}): {verdict.value}")
    return report

"""
Per-interval plausibility metrics.

For every quasi-independent interval the ledger totals give each sensor's
miss ratio MR = misses / (misses + observations) and unexpected observation
rate UOR = unexpected / observations. System-object existence probabilities
are averaged per spatial bin.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np

from src.simulation.runner import Recording, StepRecord

logger = logging.getLogger(__name__)

DEFAULT_BIN_SIZE = {'longitudinal': 25.0, 'grid': 10.0}


@dataclass(frozen=True)
class BinSpec:
    """Spatial binning of system objects: longitudinal slices along x, or square cells."""

    kind: Literal['longitudinal', 'grid'] = 'longitudinal'
    size: float = 25.0

    def __post_init__(self):
        if self.kind not in DEFAULT_BIN_SIZE:
            raise ValueError(f"unknown bin kind {self.kind!r}")
        if not self.size > 0:
            raise ValueError("bin size must be positive")

    @classmethod
    def for_scenario(cls, config) -> "BinSpec":
        """Longitudinal bins on highways, grid cells at intersections, unless configured."""
        kind = config.analysis.bin_kind or ('grid' if config.is_intersection else 'longitudinal')
        size = config.analysis.bin_size or DEFAULT_BIN_SIZE[kind]
        return cls(kind=kind, size=size)

    def label(self, x: float, y: float) -> str:
        ix = math.floor(x / self.size)
        if self.kind == 'longitudinal':
            return str(ix)
        return f"{ix}:{math.floor(y / self.size)}"

    def labels(self, points: np.ndarray) -> List[str]:
        return [self.label(float(p[0]), float(p[1])) for p in np.atleast_2d(points)]

    def center(self, label: str) -> Tuple[float, Optional[float]]:
        """Bin center; y is None for longitudinal bins."""
        if self.kind == 'longitudinal':
            return (int(label) + 0.5) * self.size, None
        ix, iy = (int(part) for part in label.split(':'))
        return (ix + 0.5) * self.size, (iy + 0.5) * self.size


def bin_sort_key(label: str) -> Tuple[int, ...]:
    return tuple(int(part) for part in label.split(':'))


@dataclass(frozen=True)
class SensorRatios:
    misses: int
    observations: int
    unexpected: int

    @property
    def mr(self) -> Optional[float]:
        """Miss ratio; None when the sensor neither observed nor missed anything."""
        total = self.misses + self.observations
        return self.misses / total if total else None

    @property
    def uor(self) -> Optional[float]:
        """Unexpected observation rate; None without observations."""
        return self.unexpected / self.observations if self.observations else None


@dataclass(frozen=True)
class BinMean:
    mean: float
    samples: int


@dataclass
class IntervalStats:
    index: int
    start: float
    end: float
    sensors: Dict[int, SensorRatios] = field(default_factory=dict)
    bins: Dict[str, BinMean] = field(default_factory=dict)

    def ratio_series(self, sensor_id: int, metric: str) -> Optional[float]:
        ratios = self.sensors.get(sensor_id)
        if ratios is None:
            return None
        return getattr(ratios, metric)


def interval_metrics(
    records: Sequence[StepRecord],
    bin_spec: BinSpec,
    sensors: Optional[Iterable[int]] = None,
    index: int = 0
) -> IntervalStats:
    """
    Aggregate one interval of a recording.

    Args:
        records: Consecutive steps of one interval
        bin_spec: Spatial binning for p_exists
        sensors: Sensors to report; every sensor in the ledgers when None
        index: Interval index

    Returns:
        Ledger-derived ratios per sensor and mean p_exists per bin
    """
    if not records:
        raise ValueError("an interval needs at least one step")

    totals: Dict[int, List[int]] = defaultdict(lambda: [0, 0, 0])
    for record in records:
        for sensor_id, entry in record.ledger.entries.items():
            counts = totals[sensor_id]
            counts[0] += entry.misses
            counts[1] += entry.observations
            counts[2] += entry.unexpected

    wanted = sorted(totals) if sensors is None else sorted(sensors)
    ratios = {
        sensor_id: SensorRatios(*totals.get(sensor_id, (0, 0, 0)))
        for sensor_id in wanted
    }

    sums: Dict[str, float] = defaultdict(float)
    counts: Dict[str, int] = defaultdict(int)
    for record in records:
        for obj in record.system_objects:
            label = bin_spec.label(obj.state.x, obj.state.y)
            sums[label] += obj.p_exists
            counts[label] += 1
    bins = {
        label: BinMean(mean=sums[label] / counts[label], samples=counts[label])
        for label in sorted(counts, key=bin_sort_key)
    }

    return IntervalStats(
        index=index,
        start=records[0].timestamp,
        end=records[-1].timestamp,
        sensors=ratios,
        bins=bins,
    )


def recording_metrics(
    recording: Recording,
    bin_spec: Optional[BinSpec] = None,
    sensors: Optional[Iterable[int]] = None
) -> List[IntervalStats]:
    """Split a recording into complete intervals and aggregate each one."""
    config = recording.header.scenario_config()
    bin_spec = bin_spec or BinSpec.for_scenario(config)
    sensors = list(sensors) if sensors is not None else config.analysed_sensors()
    stats = [
        interval_metrics(records, bin_spec, sensors, index)
        for index, records in recording.intervals(config.steps_per_interval)
    ]
    logger.info(f"Computed metrics for {len(stats)} intervals of {config.steps_per_interval} steps")
    return stats


def interval_rows(stats: Sequence[IntervalStats]) -> List[Dict[str, Any]]:
    """Metric table rows, one per (interval, sensor or bin, metric)."""
    rows: List[Dict[str, Any]] = []
    for interval in stats:
        for sensor_id, ratios in interval.sensors.items():
            for metric in ('mr', 'uor'):
                rows.append({
                    'interval': interval.index,
                    'sensor_id': sensor_id,
                    'metric': metric,
                    'mean': getattr(ratios, metric),
                    'samples': ratios.misses + ratios.observations if metric == 'mr' else ratios.observations,
                })
        for label, value in interval.bins.items():
            rows.append({
                'interval': interval.index,
                'bin_id': label,
                'metric': 'p_exists',
                'mean': value.mean,
                'samples': value.samples,
            })
    return rows

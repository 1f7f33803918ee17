"""Statistical fault diagnosis over interval metrics."""

from src.analysis.diagnosis import (
    DiagnosisReport,
    FaultClassHypothesis,
    Flag,
    diagnose,
    sensor_footprints,
    sensor_neighbors,
)
from src.analysis.metrics import BinSpec, IntervalStats, SensorRatios, interval_metrics, recording_metrics
from src.analysis.statistics import ConfidenceInterval, confidence_interval, sensor_baseline

__all__ = [
    'BinSpec',
    'ConfidenceInterval',
    'DiagnosisReport',
    'FaultClassHypothesis',
    'Flag',
    'IntervalStats',
    'SensorRatios',
    'confidence_interval',
    'diagnose',
    'interval_metrics',
    'recording_metrics',
    'sensor_baseline',
    'sensor_footprints',
    'sensor_neighbors',
]

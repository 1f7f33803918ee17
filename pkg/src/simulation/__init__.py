"""Deterministic scenario engine: traffic, sensing, fault injection and stepping."""

from src.simulation.config import (
    SCHEMA_VERSION,
    AnalysisSpec,
    BlindSpotFault,
    FalseAlarmRateFault,
    HighwaySpec,
    IntersectionSpec,
    MisorientationFault,
    ScenarioConfig,
    SensorSpec,
    TrackerThresholdFault,
    TrafficSpec,
    load_scenario,
    parse_scenario,
)
from src.simulation.runner import Recording, RecordingHeader, ScenarioRunner, StepRecord, run_scenario
from src.simulation.sensing import sense
from src.simulation.traffic import GroundTruthObject, TrafficTimeline, TruthState, generate_traffic

__all__ = [
    'SCHEMA_VERSION',
    'AnalysisSpec',
    'BlindSpotFault',
    'FalseAlarmRateFault',
    'GroundTruthObject',
    'HighwaySpec',
    'IntersectionSpec',
    'MisorientationFault',
    'Recording',
    'RecordingHeader',
    'ScenarioConfig',
    'ScenarioRunner',
    'SensorSpec',
    'StepRecord',
    'TrackerThresholdFault',
    'TrafficSpec',
    'TrafficTimeline',
    'TruthState',
    'generate_traffic',
    'load_scenario',
    'parse_scenario',
    'run_scenario',
    'sense',
]

"""Core model: value types, sensor metadata, geometry and the digital road map."""

from src.models.road_map import DigitalMap, LaneGeometry, highway_map, intersection_map
from src.models.schema import (
    BeliefMass,
    Detection,
    Dimensions,
    LedgerEntry,
    LocalObject,
    LocalObjectList,
    ObjectClass,
    ObservationLedger,
    StateVector,
    SystemObject,
    TrackStatus,
    normalize_angle,
)
from src.models.sensor import FieldOfView, Modality, SensorMeta

__all__ = [
    'BeliefMass',
    'Detection',
    'DigitalMap',
    'Dimensions',
    'FieldOfView',
    'LaneGeometry',
    'LedgerEntry',
    'LocalObject',
    'LocalObjectList',
    'Modality',
    'ObjectClass',
    'ObservationLedger',
    'SensorMeta',
    'StateVector',
    'SystemObject',
    'TrackStatus',
    'highway_map',
    'intersection_map',
    'normalize_angle',
]

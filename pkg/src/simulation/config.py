"""
Scenario configuration: versioned YAML documents validated into pydantic models.
"""

import logging
import math
from pathlib import Path
from typing import Annotated, Any, ClassVar, Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.exceptions import ConfigError
from src.fusion.types import FusionConfig
from src.models.road_map import DigitalMap, highway_map, intersection_map
from src.models.schema import ObjectClass
from src.models.sensor import FieldOfView, Modality, SensorMeta

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_POSITION_NOISE = {Modality.RADAR: 0.5, Modality.LIDAR: 0.1}


class FovSpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    range: float = Field(..., gt=0)
    horizontal_deg: float = Field(..., gt=0, le=360)
    vertical_deg: float = Field(..., gt=0, lt=180)

    def to_fov(self) -> FieldOfView:
        return FieldOfView(
            range=self.range,
            horizontal=math.radians(self.horizontal_deg),
            vertical=math.radians(self.vertical_deg),
        )


class SensorSpec(BaseModel):
    """One sensor entry of a scenario file."""

    model_config = ConfigDict(extra='forbid')

    id: int = Field(..., ge=0)
    position: Tuple[float, float, float]
    yaw_deg: float = 0.0
    pitch_deg: float = 0.0
    fov: FovSpec
    modality: Modality = Modality.RADAR
    trust: float = Field(0.9, gt=0, le=1)
    pd: float = Field(0.9, gt=0, le=1)
    pfa: float = Field(1e-6, gt=0, lt=1)
    confirmation_threshold: Optional[float] = None
    deletion_threshold: float = 0.0
    max_coasting_steps: int = Field(5, ge=1)
    over_range_factor: float = Field(1.0, ge=1.0)
    over_range_pd_factor: float = Field(1.0 / 3.0, ge=0, le=1)
    position_noise: Optional[float] = Field(None, ge=0)
    velocity_noise: float = Field(0.2, ge=0)
    ghost_probability: float = Field(0.0, ge=0, le=1)
    resolution_cells: int = Field(4096, ge=1)
    process_noise: float = Field(2.0, gt=0)

    def to_meta(self) -> SensorMeta:
        noise = self.position_noise
        if noise is None:
            noise = DEFAULT_POSITION_NOISE[self.modality]
        return SensorMeta(
            sensor_id=self.id,
            position=self.position,
            yaw=math.radians(self.yaw_deg),
            pitch=math.radians(self.pitch_deg),
            fov=self.fov.to_fov(),
            modality=self.modality,
            trust=self.trust,
            pd=self.pd,
            pfa=self.pfa,
            confirmation_threshold=self.confirmation_threshold,
            deletion_threshold=self.deletion_threshold,
            max_coasting_steps=self.max_coasting_steps,
            over_range_factor=self.over_range_factor,
            over_range_pd_factor=self.over_range_pd_factor,
            position_noise=noise,
            velocity_noise=self.velocity_noise,
            ghost_probability=self.ghost_probability,
            resolution_cells=self.resolution_cells,
            process_noise=self.process_noise,
        )


class HighwaySpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['highway'] = 'highway'
    lane_count: int = Field(4, ge=1)
    lane_width: float = Field(3.5, gt=0)
    length: float = Field(450.0, gt=0)
    margin: float = Field(20.0, ge=0)
    cell_size: float = Field(0.5, gt=0)

    def build_map(self) -> DigitalMap:
        return highway_map(self.length, self.lane_count, self.lane_width, self.margin, self.cell_size)


class IntersectionSpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['intersection'] = 'intersection'
    arm_length: float = Field(80.0, gt=0)
    lanes_per_direction: int = Field(2, ge=1)
    lane_width: float = Field(3.5, gt=0)
    sidewalk_width: float = Field(2.0, ge=0)
    cell_size: float = Field(0.5, gt=0)
    corner_offset: float = Field(4.0, ge=0, description="Set-back of the turn arcs from the junction box (m)")
    stop_line_offset: float = Field(2.0, ge=0)
    green_phase: float = Field(10.0, gt=0, description="Green time per approach leg (s)")

    def build_map(self) -> DigitalMap:
        return intersection_map(
            self.arm_length, self.lanes_per_direction, self.lane_width, self.sidewalk_width, self.cell_size
        )

    @property
    def junction_half_width(self) -> float:
        return self.lanes_per_direction * self.lane_width


RoadSpec = Annotated[Union[HighwaySpec, IntersectionSpec], Field(discriminator='kind')]


class TrafficSpec(BaseModel):
    """Arrival process and class/speed distributions."""

    model_config = ConfigDict(extra='forbid')

    arrival_rate: float = Field(0.3, ge=0, description="Vehicle arrivals per lane per second")
    class_mix: Dict[ObjectClass, float] = Field(
        default_factory=lambda: {ObjectClass.CAR: 0.85, ObjectClass.TRUCK: 0.10, ObjectClass.BUS: 0.05}
    )
    speeds: Dict[ObjectClass, Tuple[float, float]] = Field(
        default_factory=lambda: {
            ObjectClass.CAR: (25.0, 36.0),
            ObjectClass.TRUCK: (22.0, 25.0),
            ObjectClass.BUS: (22.0, 27.0),
            ObjectClass.CYCLIST: (4.0, 7.0),
            ObjectClass.PEDESTRIAN: (1.2, 1.6),
        }
    )
    vru_fraction: float = Field(0.0, ge=0, lt=1)
    turn_mix: Tuple[float, float, float] = Field(
        (0.25, 0.5, 0.25), description="Probabilities of left, straight and right"
    )

    @model_validator(mode='after')
    def check_distributions(self) -> "TrafficSpec":
        vehicles = {c: p for c, p in self.class_mix.items() if p > 0}
        if not vehicles or abs(sum(vehicles.values()) - 1.0) > 1e-6:
            raise ValueError("class_mix must be a probability distribution")
        for object_class in vehicles:
            if object_class not in self.speeds:
                raise ValueError(f"no speed range for class {object_class.value}")
        for object_class, (low, high) in self.speeds.items():
            if not 0 < low <= high:
                raise ValueError(f"invalid speed range for {object_class.value}")
        if any(p < 0 for p in self.turn_mix) or abs(sum(self.turn_mix) - 1.0) > 1e-6:
            raise ValueError("turn_mix must be a probability distribution")
        return self


class MisorientationFault(BaseModel):
    """Class 1: readings reported under a wrong mounting azimuth."""

    model_config = ConfigDict(extra='forbid')

    type: Literal['misorientation'] = 'misorientation'
    sensor_id: int
    delta_deg: float

    fault_class: ClassVar[int] = 1

    @property
    def delta(self) -> float:
        return math.radians(self.delta_deg)


class TrackerThresholdFault(BaseModel):
    """Class 2: lowered confirmation threshold of one tracker."""

    model_config = ConfigDict(extra='forbid')

    type: Literal['tracker_threshold'] = 'tracker_threshold'
    sensor_id: int
    threshold: Optional[float] = None
    threshold_factor: Optional[float] = Field(None, gt=0)

    fault_class: ClassVar[int] = 2

    @model_validator(mode='after')
    def check_exclusive(self) -> "TrackerThresholdFault":
        if (self.threshold is None) == (self.threshold_factor is None):
            raise ValueError("set exactly one of threshold and threshold_factor")
        return self

    def faulty_threshold(self, sensor: SensorMeta) -> float:
        if self.threshold is not None:
            return self.threshold
        return sensor.confirmation * self.threshold_factor


class BlindSpotFault(BaseModel):
    """Class 3: no detections inside an azimuth wedge."""

    model_config = ConfigDict(extra='forbid')

    type: Literal['blind_spot'] = 'blind_spot'
    sensor_id: int
    width_deg: float = Field(..., gt=0, le=360)
    center_azimuth_deg: Optional[float] = Field(
        None, description="Wedge center relative to boresight; toward the map origin when unset"
    )

    fault_class: ClassVar[int] = 3

    @property
    def width(self) -> float:
        return math.radians(self.width_deg)


class FalseAlarmRateFault(BaseModel):
    """Class 2: raised false-alarm rate."""

    model_config = ConfigDict(extra='forbid')

    type: Literal['false_alarm_rate'] = 'false_alarm_rate'
    sensor_id: int
    factor: float = Field(..., gt=0)

    fault_class: ClassVar[int] = 2


FaultSpec = Annotated[
    Union[MisorientationFault, TrackerThresholdFault, BlindSpotFault, FalseAlarmRateFault],
    Field(discriminator='type'),
]


class AnalysisSpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    interval: float = Field(5.0, gt=0, description="Interval length (s)")
    bin_kind: Optional[Literal['longitudinal', 'grid']] = Field(
        None, description="Spatial binning; longitudinal on highways, grid at intersections when unset"
    )
    bin_size: Optional[float] = Field(None, gt=0)
    sensors: Optional[List[int]] = Field(None, description="Sensors included in the statistics")
    min_intervals: int = Field(10, ge=2)
    confidence: float = Field(0.95, gt=0, lt=1)


class ScenarioConfig(BaseModel):
    """Complete description of one simulation run."""

    model_config = ConfigDict(extra='forbid')

    schema_version: int
    name: str = Field(..., min_length=1)
    seed: int = Field(0, ge=0)
    sample_period: float = Field(0.1, gt=0)
    duration: float = Field(..., ge=0)
    road: RoadSpec
    traffic: TrafficSpec = Field(default_factory=TrafficSpec)
    sensors: List[SensorSpec] = Field(..., min_length=1)
    faults: List[FaultSpec] = Field(default_factory=list, max_length=1)
    fusion: FusionConfig = Field(default_factory=FusionConfig)
    analysis: AnalysisSpec = Field(default_factory=AnalysisSpec)

    @model_validator(mode='after')
    def check_scenario(self) -> "ScenarioConfig":
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {self.schema_version}, expected {SCHEMA_VERSION}")
        ids = [s.id for s in self.sensors]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate sensor ids: {ids}")
        for fault in self.faults:
            if fault.sensor_id not in ids:
                raise ValueError(f"fault targets unknown sensor {fault.sensor_id}")
        if self.analysis.sensors is not None:
            unknown = set(self.analysis.sensors) - set(ids)
            if unknown:
                raise ValueError(f"analysis references unknown sensors {sorted(unknown)}")
        if 0 < self.duration < self.analysis.interval:
            raise ValueError("duration must be 0 or at least one analysis interval")
        if self.analysis.interval < self.sample_period:
            raise ValueError("analysis interval must span at least one sample period")
        return self

    @property
    def fault(self):
        return self.faults[0] if self.faults else None

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.duration / self.sample_period + 1e-9))

    @property
    def steps_per_interval(self) -> int:
        return max(1, int(round(self.analysis.interval / self.sample_period)))

    @property
    def is_intersection(self) -> bool:
        return self.road.kind == 'intersection'

    def sensor_metas(self) -> List[SensorMeta]:
        return [spec.to_meta() for spec in sorted(self.sensors, key=lambda s: s.id)]

    def analysed_sensors(self) -> List[int]:
        if self.analysis.sensors is not None:
            return sorted(self.analysis.sensors)
        return sorted(s.id for s in self.sensors)

    def build_map(self) -> DigitalMap:
        return self.road.build_map()


def _line_of(node: Optional[yaml.Node], location: Tuple[Any, ...]) -> Optional[int]:
    """Follow an error location through the composed YAML tree; 1-based line of the deepest match."""
    if node is None:
        return None
    line = node.start_mark.line + 1
    for part in location:
        child = None
        if isinstance(node, yaml.MappingNode) and isinstance(part, str):
            for key_node, value_node in node.value:
                if getattr(key_node, 'value', None) == part:
                    child = value_node
                    line = key_node.start_mark.line + 1
                    break
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int):
            if 0 <= part < len(node.value):
                child = node.value[part]
                line = child.start_mark.line + 1
        if child is None:
            # discriminator tags and defaulted fields have no node of their own
            continue
        node = child
    return line


def _merge_sensor_defaults(data: Dict[str, Any]) -> Dict[str, Any]:
    defaults = data.pop('sensor_defaults', None) or {}
    if not isinstance(defaults, dict):
        raise ValueError("sensor_defaults must be a mapping")
    sensors = data.get('sensors')
    if isinstance(sensors, list):
        merged = []
        for entry in sensors:
            if isinstance(entry, dict):
                combined = dict(defaults)
                combined.update(entry)
                merged.append(combined)
            else:
                merged.append(entry)
        data['sensors'] = merged
    return data


def parse_scenario(text: str, source: str = "<scenario>") -> ScenarioConfig:
    """
    Validate a scenario document.

    Raises:
        ConfigError: Malformed YAML or invalid content, anchored to the offending line
    """
    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"malformed YAML: {getattr(e, 'problem', e)}", source, line) from e

    if not isinstance(data, dict):
        raise ConfigError("scenario must be a mapping", source, 1)
    if 'schema_version' not in data:
        raise ConfigError("missing schema_version header", source, 1)
    if data.get('schema_version') != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {data.get('schema_version')!r}, expected {SCHEMA_VERSION}",
            source,
            _line_of(root, ('schema_version',)),
        )

    try:
        data = _merge_sensor_defaults(data)
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = tuple(first.get('loc', ()))
        field_path = ".".join(str(part) for part in location) or "scenario"
        raise ConfigError(f"{field_path}: {first.get('msg')}", source, _line_of(root, location)) from e
    except ValueError as e:
        raise ConfigError(str(e), source, _line_of(root, ('sensor_defaults',))) from e


def load_scenario(path: Union[str, Path], seed: Optional[int] = None) -> ScenarioConfig:
    """
    Load a scenario file, optionally overriding its seed.

    Raises:
        ConfigError: Unreadable or invalid file
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"cannot read scenario: {e.strerror or e}", path) from e

    config = parse_scenario(text, str(path))
    if seed is not None:
        if seed < 0:
            raise ConfigError("seed must be non-negative", path)
        config = config.model_copy(update={'seed': seed})
    logger.info(f"Loaded scenario '{config.name}' from {path} (seed {config.seed})")
    return config

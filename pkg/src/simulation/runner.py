"""
Scenario stepping: sense, track and fuse at the sample period.

Per-sensor sense and track stages of one step are independent and may run on
a thread pool; fusion joins them in sensor order so the recording does not
depend on the worker count.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Protocol, Sequence, Tuple

from pydantic import ValidationError

from src import __version__
from src.exceptions import ConfigError
from src.fusion.engine import FusionEngine
from src.models.schema import LocalObject, LocalObjectList, ObservationLedger, SystemObject
from src.models.sensor import SensorMeta
from src.simulation.config import SCHEMA_VERSION, ScenarioConfig
from src.simulation.faults import confirmation_threshold, describe
from src.simulation.sensing import scan_seed, sense
from src.simulation.traffic import TrafficTimeline, TruthState, generate_traffic
from src.tracking.config import TrackerConfig
from src.tracking.tracker import SensorTracker
from src.utils.hashing import config_hash
from src.utils.logger import RunLogger

logger = logging.getLogger(__name__)


@dataclass
class StepRecord:
    """Everything observed and produced at one time step."""
    step: int
    timestamp: float
    truth: List[TruthState]
    local_objects: LocalObjectList
    system_objects: List[SystemObject]
    ledger: ObservationLedger
    diagnostics: List[str] = field(default_factory=list)


@dataclass
class RecordingHeader:
    scenario: Dict[str, Any]
    seed: int
    tool_version: str = __version__
    config_hash: str = ""
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def for_config(cls, config: ScenarioConfig) -> "RecordingHeader":
        scenario = config.model_dump(mode='json')
        return cls(scenario=scenario, seed=config.seed, config_hash=config_hash(scenario))

    def scenario_config(self) -> ScenarioConfig:
        return ScenarioConfig.model_validate(self.scenario)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': self.schema_version,
            'tool_version': self.tool_version,
            'seed': self.seed,
            'config_hash': self.config_hash,
            'scenario': self.scenario,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RecordingHeader":
        return cls(
            scenario=data['scenario'],
            seed=int(data['seed']),
            tool_version=str(data.get('tool_version', '')),
            config_hash=str(data.get('config_hash', '')),
            schema_version=int(data['schema_version']),
        )


@dataclass
class Recording:
    header: RecordingHeader
    steps: List[StepRecord] = field(default_factory=list)

    def intervals(self, steps_per_interval: int) -> Iterator[Tuple[int, List[StepRecord]]]:
        """Consecutive complete intervals; a trailing partial interval is dropped."""
        if steps_per_interval < 1:
            raise ValueError("steps_per_interval must be positive")
        complete = len(self.steps) // steps_per_interval
        for index in range(complete):
            start = index * steps_per_interval
            yield index, self.steps[start:start + steps_per_interval]

    def __len__(self) -> int:
        return len(self.steps)


class RecordingSink(Protocol):
    def write_step(self, record: StepRecord) -> None:
        ...


class _SensorStage:
    """Sense and track for one sensor."""

    def __init__(self, sensor: SensorMeta, tracker: SensorTracker, fault, seed: int):
        self.sensor = sensor
        self.tracker = tracker
        self.fault = fault
        self.seed = seed

    def __call__(self, step: int, timestamp: float, truth: Sequence[TruthState]) -> List[LocalObject]:
        detections = sense(
            truth,
            self.sensor,
            self.fault,
            seed=scan_seed(self.seed, self.sensor.sensor_id, step),
            timestamp=timestamp,
        )
        return self.tracker.step(detections, timestamp)


class ScenarioRunner:
    """
    Drives one scenario from its configuration to a recording.

    Args:
        config: Validated scenario
        workers: Threads for the per-sensor stages (1 runs them inline)
        sink: Optional consumer receiving every step as it is produced
    """

    def __init__(self, config: ScenarioConfig, workers: int = 1, sink: Optional[RecordingSink] = None):
        self.config = config
        self.workers = max(1, int(workers))
        self.sink = sink
        self.fault = config.fault
        self.sensors = config.sensor_metas()
        self.road_map = config.build_map()
        self.run_logger = RunLogger(__name__)

        # One sensing and tracking stage per sensor, then the fusion centre
        # 센서별 감지 및 추적 단계, 그리고 퓨전 센터
        self.stages = [self._build_stage(sensor) for sensor in self.sensors]
        self.engine = FusionEngine(self.sensors, self.road_map, config.fusion)

    def _build_stage(self, sensor: SensorMeta) -> _SensorStage:
        threshold = confirmation_threshold(sensor, self.fault)
        try:
            tracker_config = TrackerConfig.from_sensor(sensor, confirmation_threshold=threshold)
        except (ValidationError, ValueError) as e:
            raise ConfigError(f"sensor {sensor.sensor_id}: invalid tracker parameters: {e}") from e
        if threshold is not None:
            logger.info(
                f"Sensor {sensor.sensor_id}: confirmation threshold {sensor.confirmation:.3f} "
                f"replaced by {threshold:.3f}"
            )
        return _SensorStage(sensor, SensorTracker(sensor, tracker_config), self.fault, self.config.seed)

    def run(self, timeline: Optional[TrafficTimeline] = None) -> Recording:
        """
        Execute every step.

        Args:
            timeline: Ground truth to use instead of generating it from the config

        Returns:
            The complete in-memory recording
        """
        config = self.config
        timeline = timeline if timeline is not None else generate_traffic(config)
        recording = Recording(RecordingHeader.for_config(config))
        steps = config.n_steps
        started = time.perf_counter()
        self.run_logger.log_run_start(config.name, config.seed, steps, describe(self.fault))

        # Stages are independent within a step; results are gathered in sensor order
        # 스텝 내 단계는 서로 독립적이며 결과는 센서 순서로 수집
        executor = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 1 else None
        try:
            for step in range(steps):
                record = self._step(step, timeline, executor)
                recording.steps.append(record)
                if self.sink is not None:
                    self.sink.write_step(record)
                # Progress log per analysis interval
                if (step + 1) % config.steps_per_interval == 0:
                    self._log_interval(step // config.steps_per_interval, recording.steps[-config.steps_per_interval:])
        finally:
            if executor is not None:
                executor.shutdown(wait=True)

        self.run_logger.log_run_complete(len(recording), time.perf_counter() - started)
        return recording

    def _step(self, step: int, timeline: TrafficTimeline, executor: Optional[ThreadPoolExecutor]) -> StepRecord:
        timestamp = round(step * self.config.sample_period, 9)
        truth = timeline.snapshot(timestamp)

        # Sense and track
        # 감지 및 추적
        if executor is None:
            outputs = [stage(step, timestamp, truth) for stage in self.stages]
        else:
            futures = [executor.submit(stage, step, timestamp, truth) for stage in self.stages]
            outputs = [future.result() for future in futures]

        # Fuse
        # 퓨전
        local_objects = LocalObjectList(
            timestamp=timestamp,
            objects={stage.sensor.sensor_id: objects for stage, objects in zip(self.stages, outputs)},
        )
        system_objects, ledger, diagnostics = self.engine.step(local_objects)
        for message in diagnostics:
            self.run_logger.log_conflict(message)
        logger.debug(
            f"Step {step}: {len(truth)} truth, {len(local_objects)} local, {len(system_objects)} system objects"
        )
        return StepRecord(
            step=step,
            timestamp=timestamp,
            truth=truth,
            local_objects=local_objects,
            system_objects=system_objects,
            ledger=ledger,
            diagnostics=diagnostics,
        )

    def _log_interval(self, index: int, records: Sequence[StepRecord]) -> None:
        misses = unexpected = objects = 0
        for record in records:
            totals = record.ledger.totals()
            misses += totals.misses
            unexpected += totals.unexpected
            objects += len(record.system_objects)
        self.run_logger.log_interval(index, objects, misses, unexpected)


def run_scenario(
    config: ScenarioConfig,
    workers: int = 1,
    sink: Optional[RecordingSink] = None,
    timeline: Optional[TrafficTimeline] = None
) -> Recording:
    """Run a scenario end to end and return its recording."""
    return ScenarioRunner(config, workers=workers, sink=sink).run(timeline)

"""
Combined object fusion and plausibilization, one synchronous step at a time.
"""

import logging
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from src.exceptions import TotalConflictError
from src.fusion.clustering import cluster
from src.fusion.frame_association import associate_frames
from src.fusion.types import FusionConfig, FusionState, TrackCluster
from src.models.road_map import DigitalMap
from src.models.schema import BeliefMass, LocalObject, LocalObjectList, ObservationLedger, SystemObject
from src.models.sensor import SensorMeta
from src.plausibility.corrections import apply_corrections, dim_vel_correction, history_correction
from src.plausibility.evidence import combine_all, pignistic
from src.plausibility.factors import SigmoidCalib, calibrate_for_sensor, miss_mass, object_bba
from src.plausibility.limits import ValueLimits
from src.plausibility.redundancy import Contribution, ContributionKind, classify_contribution

logger = logging.getLogger(__name__)


class SensorContribution(NamedTuple):
    sensor_id: int
    contribution: Contribution
    mass: BeliefMass


def evaluate_cluster(
    track_cluster: TrackCluster,
    sensors: Sequence[SensorMeta],
    confirmed: Dict[int, List[LocalObject]],
    road_map: DigitalMap,
    limits: ValueLimits,
    calibrations: Dict[int, SigmoidCalib]
) -> List[SensorContribution]:
    """
    Classify every sensor's view of a cluster and assign its belief mass.

    Args:
        track_cluster: Cluster under evaluation
        sensors: All sensors of the network
        confirmed: Confirmed local objects per sensor
        road_map: Digital map for the map check
        limits: Attribute limits
        calibrations: Score sigmoid per sensor

    Returns:
        One entry per sensor, in sensor order
    """
    estimate = track_cluster.estimate
    results = []
    for sensor in sensors:
        member = track_cluster.member_for(sensor.sensor_id)
        others = [
            obj for obj in confirmed.get(sensor.sensor_id, [])
            if member is None or obj.track_id != member.track_id
        ]
        contribution = classify_contribution(member, sensor, estimate.state, estimate.dims, others)
        if contribution.kind is ContributionKind.REGULAR:
            mass = object_bba(member, others, sensor, road_map, limits, calibrations[sensor.sensor_id])
        elif contribution.kind is ContributionKind.MISS:
            mass = miss_mass(sensor.trust)
        else:
            mass = BeliefMass.vacuous()
        results.append(SensorContribution(sensor.sensor_id, contribution, mass))
    return results


def _register(ledger: ObservationLedger, item: SensorContribution) -> None:
    kind = item.contribution.kind
    if kind is ContributionKind.REGULAR:
        ledger.register_regular(item.sensor_id)
        if item.contribution.coasting_miss:
            ledger.register_miss(item.sensor_id)
    elif kind is ContributionKind.UNEXPECTED:
        ledger.register_unexpected(item.sensor_id)
    elif kind is ContributionKind.MISS:
        ledger.register_miss(item.sensor_id)


def _blend_masses(current: BeliefMass, previous: BeliefMass, alpha: float) -> BeliefMass:
    return BeliefMass.from_array(alpha * current.to_array() + (1 - alpha) * previous.to_array())


def fuse_step(
    objects: LocalObjectList,
    sensors: Sequence[SensorMeta],
    road_map: DigitalMap,
    limits: Optional[ValueLimits],
    state: FusionState,
    config: Optional[FusionConfig] = None,
    calibrations: Optional[Dict[int, SigmoidCalib]] = None
) -> Tuple[List[SystemObject], ObservationLedger]:
    """
    Turn one step of local object lists into plausibilized system objects.

    Clustering, per-sensor BBAs with miss and unexpected registration, DS
    combination, merging, frame association, model-based corrections and the
    pignistic transform, in that order. A cluster whose masses fully conflict
    is dropped with a diagnostic in state.diagnostics.

    Returns:
        System objects and the step's observation ledger
    """
    config = config or FusionConfig()
    limits = limits or config.limits
    sensors = sorted(sensors, key=lambda s: s.sensor_id)
    if calibrations is None:
        calibrations = {s.sensor_id: calibrate_for_sensor(s) for s in sensors}
    ledger = ObservationLedger(timestamp=objects.timestamp)

    # Confirmed tracks per sensor, the only ones that count as observations
    # 센서별 확정 트랙 (관측으로 인정되는 트랙만)
    confirmed = {
        sensor_id: [o for o in objects.for_sensor(sensor_id) if o.status.confirmed]
        for sensor_id in objects.objects
    }

    # Cluster, evaluate every sensor against the cluster, combine the masses
    # 클러스터링 후 센서별 BBA 계산 및 결합
    provisional = []
    for track_cluster in cluster(objects, config.cluster_gate_probability):
        contributions = evaluate_cluster(track_cluster, sensors, confirmed, road_map, limits, calibrations)
        for item in contributions:
            _register(ledger, item)
        # Fully conflicting evidence: no object, only a diagnostic
        try:
            fused_mass = combine_all(item.mass for item in contributions)
        except TotalConflictError as e:
            message = (
                f"t={objects.timestamp:.2f}: total conflict in cluster "
                f"{sorted(m.key for m in track_cluster.members)}: {e}"
            )
            logger.warning(message)
            state.diagnostics.append(message)
            continue
        estimate = track_cluster.estimate
        p_exists, s_exists = pignistic(fused_mass)
        provisional.append(SystemObject(
            global_id=-1,
            timestamp=objects.timestamp,
            state=estimate.state,
            covariance=estimate.covariance,
            dims=estimate.dims,
            status=estimate.status,
            p_exists=p_exists,
            s_exists=s_exists,
            contributors=track_cluster.sensor_ids,
            mass=fused_mass,
        ))

    # Carry global ids over from the previous frame
    # 이전 프레임과 연결하여 전역 ID 유지
    associated = associate_frames(provisional, state.previous, state, config)

    results = []
    for obj in associated:
        # Model-based corrections: history first, then dimensions and speed
        # 모델 기반 보정: 이력, 그 다음 크기와 속도
        deltas = []
        previous_exists = state.history.get(obj.global_id)
        if previous_exists is not None:
            deltas.append(history_correction(obj.mass, previous_exists, obj.status.coasting))
        deltas.append(dim_vel_correction(obj.mass, obj.dims, obj.state.speed, limits))
        corrected = apply_corrections(obj.mass, deltas)
        if config.smooth_existence and obj.global_id in state.masses:
            corrected = _blend_masses(corrected, state.masses[obj.global_id], config.smoothing)
        p_exists, s_exists = pignistic(corrected)
        results.append(obj.model_copy(update={'mass': corrected, 'p_exists': p_exists, 's_exists': s_exists}))

    # Keep this frame for the next step
    # 다음 스텝을 위해 현재 프레임 저장
    state.previous = results
    state.history = {obj.global_id: obj.mass.m_exists for obj in results}
    state.masses = {obj.global_id: obj.mass for obj in results}
    return results, ledger


class FusionEngine:
    """Stateful fusion centre of one run."""

    def __init__(
        self,
        sensors: Sequence[SensorMeta],
        road_map: DigitalMap,
        config: Optional[FusionConfig] = None
    ):
        self.sensors = sorted(sensors, key=lambda s: s.sensor_id)
        self.road_map = road_map
        self.config = config or FusionConfig()
        self.state = FusionState()
        # calibrated against nominal parameters; the fusion centre does not know about faults
        self.calibrations = {s.sensor_id: calibrate_for_sensor(s) for s in self.sensors}

    def step(self, objects: LocalObjectList) -> Tuple[List[SystemObject], ObservationLedger, List[str]]:
        """Fuse one step and hand back its diagnostics."""
        system_objects, ledger = fuse_step(
            objects,
            self.sensors,
            self.road_map,
            self.config.limits,
            self.state,
            self.config,
            self.calibrations,
        )
        return system_objects, ledger, self.state.drain_diagnostics()

"""
Ground-truth traffic generation.

Trajectories are piecewise kinematic: straight segments with constant
acceleration and circular arcs at constant speed. Highway traffic follows
per-lane Poisson arrivals without lane changes; intersection agents approach on
a leg, stop at red, and turn along arc connectors, while pedestrians and
cyclists move along the kerb.
"""

import bisect
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from src.models.schema import Dimensions, ObjectClass

logger = logging.getLogger(__name__)

STREAM_TRAFFIC = 0

CLASS_DIMENSIONS: Dict[ObjectClass, Tuple[float, float, float]] = {
    ObjectClass.CAR: (4.5, 1.8, 1.5),
    ObjectClass.TRUCK: (12.0, 2.5, 3.8),
    ObjectClass.BUS: (12.0, 2.55, 3.2),
    ObjectClass.CYCLIST: (1.8, 0.6, 1.7),
    ObjectClass.PEDESTRIAN: (0.5, 0.5, 1.75),
}
HEAVY_CLASSES = frozenset({ObjectClass.TRUCK, ObjectClass.BUS})
VRU_CLASSES = (ObjectClass.PEDESTRIAN, ObjectClass.CYCLIST)

MIN_GAP = 2.0
BRAKE_DECELERATION = 3.0
ACCELERATION = 2.0
QUEUE_SPACING = 7.5
RELEASE_GAP = 2.0


@dataclass(frozen=True)
class LinearSegment:
    t_start: float
    t_end: float
    origin: Tuple[float, float]
    heading: float
    speed: float
    acceleration: float = 0.0

    def planar_state(self, t: float) -> Tuple[float, float, float, float, float]:
        tau = t - self.t_start
        distance = self.speed * tau + 0.5 * self.acceleration * tau * tau
        speed = self.speed + self.acceleration * tau
        c, s = math.cos(self.heading), math.sin(self.heading)
        return self.origin[0] + distance * c, self.origin[1] + distance * s, speed * c, speed * s, self.heading


@dataclass(frozen=True)
class ArcSegment:
    t_start: float
    t_end: float
    center: Tuple[float, float]
    radius: float
    angle_start: float
    angular_rate: float

    def planar_state(self, t: float) -> Tuple[float, float, float, float, float]:
        angle = self.angle_start + self.angular_rate * (t - self.t_start)
        c, s = math.cos(angle), math.sin(angle)
        speed = self.radius * self.angular_rate
        heading = angle + math.copysign(math.pi / 2.0, self.angular_rate)
        return self.center[0] + self.radius * c, self.center[1] + self.radius * s, -speed * s, speed * c, heading


Segment = Union[LinearSegment, ArcSegment]


class TruthState(NamedTuple):
    object_id: int
    object_class: ObjectClass
    position: np.ndarray
    velocity: np.ndarray
    dims: Dimensions


@dataclass(frozen=True)
class GroundTruthObject:
    object_id: int
    object_class: ObjectClass
    length: float
    width: float
    height: float
    segments: Tuple[Segment, ...]

    @property
    def t_start(self) -> float:
        return self.segments[0].t_start

    @property
    def t_end(self) -> float:
        return self.segments[-1].t_end

    def state_at(self, t: float) -> Optional[TruthState]:
        if not self.t_start <= t < self.t_end:
            return None
        starts = [segment.t_start for segment in self.segments]
        segment = self.segments[max(0, bisect.bisect_right(starts, t) - 1)]
        x, y, vx, vy, heading = segment.planar_state(t)
        return TruthState(
            object_id=self.object_id,
            object_class=self.object_class,
            position=np.array([x, y, self.height / 2.0]),
            velocity=np.array([vx, vy, 0.0]),
            dims=Dimensions(length=self.length, width=self.width, height=self.height, heading=heading),
        )


@dataclass
class TrafficTimeline:
    """All ground-truth objects of a run."""

    objects: List[GroundTruthObject] = field(default_factory=list)

    def __post_init__(self):
        self.objects = sorted(self.objects, key=lambda o: o.object_id)
        self._starts = np.array([o.t_start for o in self.objects])
        self._ends = np.array([o.t_end for o in self.objects])

    def snapshot(self, t: float) -> List[TruthState]:
        """States of all objects present at time t, ordered by id."""
        if not self.objects:
            return []
        active = np.nonzero((self._starts <= t) & (t < self._ends))[0]
        states = (self.objects[i].state_at(t) for i in active)
        return [state for state in states if state is not None]

    def __len__(self) -> int:
        return len(self.objects)


class _PathBuilder:
    """Accumulates trajectory segments from a start pose."""

    def __init__(self, t: float, x: float, y: float, heading: float, speed: float):
        self.t, self.x, self.y, self.heading, self.speed = t, x, y, heading, speed
        self.segments: List[Segment] = []

    def straight(self, distance: float, end_speed: Optional[float] = None) -> None:
        """Move along the heading, changing speed uniformly to end_speed."""
        if distance <= 0:
            return
        end_speed = self.speed if end_speed is None else end_speed
        mean_speed = (self.speed + end_speed) / 2.0
        if mean_speed <= 0:
            return
        duration = distance / mean_speed
        acceleration = (end_speed - self.speed) / duration
        self.segments.append(LinearSegment(
            t_start=self.t, t_end=self.t + duration, origin=(self.x, self.y),
            heading=self.heading, speed=self.speed, acceleration=acceleration,
        ))
        self.t += duration
        self.x += distance * math.cos(self.heading)
        self.y += distance * math.sin(self.heading)
        self.speed = end_speed

    def hold(self, until: float) -> None:
        if until > self.t:
            self.segments.append(LinearSegment(
                t_start=self.t, t_end=until, origin=(self.x, self.y), heading=self.heading, speed=0.0,
            ))
            self.t = until

    def cruise_toward(self, distance: float, target_speed: float) -> None:
        """Accelerate toward target_speed within distance, then cruise the rest."""
        if self.speed >= target_speed:
            self.straight(distance)
            return
        needed = (target_speed ** 2 - self.speed ** 2) / (2.0 * ACCELERATION)
        if needed >= distance:
            self.straight(distance, math.sqrt(self.speed ** 2 + 2.0 * ACCELERATION * distance))
            return
        self.straight(needed, target_speed)
        self.straight(distance - needed)

    def turn(self, radius: float, direction: int) -> None:
        """Quarter turn; direction +1 turns left, -1 right."""
        speed = max(self.speed, 1.0)
        self.speed = speed
        normal = self.heading + direction * math.pi / 2.0
        center = (self.x + radius * math.cos(normal), self.y + radius * math.sin(normal))
        angle_start = normal + math.pi
        rate = direction * speed / radius
        duration = (math.pi / 2.0) / abs(rate)
        self.segments.append(ArcSegment(
            t_start=self.t, t_end=self.t + duration, center=center, radius=radius,
            angle_start=angle_start, angular_rate=rate,
        ))
        end_angle = angle_start + rate * duration
        self.t += duration
        self.x = center[0] + radius * math.cos(end_angle)
        self.y = center[1] + radius * math.sin(end_angle)
        self.heading += direction * math.pi / 2.0


def _sample_dims(rng: np.random.Generator, object_class: ObjectClass) -> Tuple[float, float, float]:
    scale = rng.uniform(0.95, 1.05, size=3)
    nominal = CLASS_DIMENSIONS[object_class]
    return tuple(float(n * s) for n, s in zip(nominal, scale))


def _vehicle_classes(traffic) -> Tuple[List[ObjectClass], np.ndarray]:
    classes = sorted((c for c, p in traffic.class_mix.items() if p > 0), key=lambda c: c.value)
    probabilities = np.array([traffic.class_mix[c] for c in classes], dtype=float)
    return classes, probabilities / probabilities.sum()


def _highway_traffic(config, rng: np.random.Generator) -> List[GroundTruthObject]:
    road = config.road
    traffic = config.traffic
    objects: List[GroundTruthObject] = []
    if traffic.arrival_rate <= 0 or config.duration <= 0:
        return objects

    classes, probabilities = _vehicle_classes(traffic)
    slowest = min(traffic.speeds[c][0] for c in classes)
    warmup = road.length / slowest

    for lane in range(road.lane_count):
        lane_y = (lane + 0.5) * road.lane_width
        t = -warmup
        leader = None
        while True:
            t += rng.exponential(1.0 / traffic.arrival_rate)
            if t >= config.duration:
                break
            object_class = classes[rng.choice(len(classes), p=probabilities)]
            # heavy vehicles keep to the two rightmost lanes
            if object_class in HEAVY_CLASSES and lane >= 2:
                object_class = ObjectClass.CAR
            speed = float(rng.uniform(*traffic.speeds[object_class]))
            length, width, height = _sample_dims(rng, object_class)

            if leader is not None:
                gap = (leader.length + length) / 2.0 + MIN_GAP
                lead_speed = leader.segments[0].speed
                t = max(t, leader.t_start + gap / lead_speed)
                if speed > lead_speed:
                    remaining = leader.t_end - t
                    if remaining > 0:
                        speed = max(lead_speed, min(speed, (road.length - gap) / remaining))
                if t >= config.duration:
                    break

            segment = LinearSegment(
                t_start=t, t_end=t + road.length / speed, origin=(0.0, lane_y), heading=0.0, speed=speed,
            )
            leader = GroundTruthObject(
                object_id=0, object_class=object_class, length=length, width=width, height=height,
                segments=(segment,),
            )
            objects.append(leader)
    return objects


class _SignalPlan:
    """Round-robin green phases, one approach leg at a time."""

    def __init__(self, green: float, legs: int = 4):
        self.green = green
        self.cycle = green * legs

    def is_green(self, leg: int, t: float) -> bool:
        phase = t % self.cycle
        return leg * self.green <= phase < (leg + 1) * self.green

    def next_green(self, leg: int, t: float) -> float:
        if self.is_green(leg, t):
            return t
        start = math.floor(t / self.cycle) * self.cycle + leg * self.green
        if start <= t:
            start += self.cycle
        return start


def _rotate(x: float, y: float, angle: float) -> Tuple[float, float]:
    c, s = math.cos(angle), math.sin(angle)
    return c * x - s * y, s * x + c * y


def _intersection_traffic(config, rng: np.random.Generator) -> List[GroundTruthObject]:
    road = config.road
    traffic = config.traffic
    objects: List[GroundTruthObject] = []
    if traffic.arrival_rate <= 0 or config.duration <= 0:
        return objects

    classes, probabilities = _vehicle_classes(traffic)
    lanes = road.lanes_per_direction
    width = road.lane_width
    junction = road.junction_half_width + road.corner_offset
    approach = road.arm_length - junction
    stop_distance = approach - road.stop_line_offset
    signals = _SignalPlan(road.green_phase)
    # slot count per (leg, lane, green start)
    queues: Dict[Tuple[int, int, float], int] = {}

    for leg in range(4):
        heading = leg * math.pi / 2.0
        rate = traffic.arrival_rate * lanes
        t = -road.green_phase * 4.0
        last_spawn: Dict[int, Tuple[float, float]] = {}
        while True:
            t += rng.exponential(1.0 / rate)
            if t >= config.duration:
                break
            if rng.random() < traffic.vru_fraction:
                object_class = VRU_CLASSES[0] if rng.random() < 0.7 else VRU_CLASSES[1]
                objects.append(_vru_agent(rng, object_class, t, heading, road, traffic))
                continue

            object_class = classes[rng.choice(len(classes), p=probabilities)]
            lane = int(rng.integers(lanes))
            turn = int(rng.choice(3, p=np.asarray(traffic.turn_mix)))
            # left turns leave from the inner lane, right turns from the outer one
            if turn == 0:
                lane = 0
            elif turn == 2:
                lane = lanes - 1
            speed = float(rng.uniform(*traffic.speeds[object_class]))
            length, width_obj, height = _sample_dims(rng, object_class)

            spawn = t
            previous = last_spawn.get(lane)
            if previous is not None:
                prev_time, prev_speed = previous
                spawn = max(spawn, prev_time + (length + MIN_GAP * 2) / prev_speed)
                speed = min(speed, prev_speed)
            if spawn >= config.duration:
                continue
            last_spawn[lane] = (spawn, speed)

            offset = (lane + 0.5) * width
            x0, y0 = _rotate(-road.arm_length, -offset, heading)
            builder = _PathBuilder(spawn, x0, y0, heading, speed)

            arrival = spawn + stop_distance / speed
            if signals.is_green(leg, arrival):
                builder.straight(approach)
            else:
                green = signals.next_green(leg, arrival)
                slot = queues.get((leg, lane, green), 0)
                brake = speed ** 2 / (2.0 * BRAKE_DECELERATION)
                stop_at = stop_distance - slot * QUEUE_SPACING
                if stop_at - brake < 1.0:
                    continue
                queues[(leg, lane, green)] = slot + 1
                builder.straight(stop_at - brake)
                builder.straight(brake, 0.0)
                builder.hold(green + slot * RELEASE_GAP)
                builder.cruise_toward(approach - stop_at, speed)

            if turn == 1:
                builder.cruise_toward(2.0 * junction, speed)
            elif turn == 0:
                builder.turn(junction + offset, +1)
            else:
                builder.turn(junction - offset, -1)
            builder.cruise_toward(approach, speed)

            objects.append(GroundTruthObject(
                object_id=0, object_class=object_class, length=length, width=width_obj, height=height,
                segments=tuple(builder.segments),
            ))
    return objects


def _vru_agent(rng, object_class: ObjectClass, t: float, heading: float, road, traffic) -> GroundTruthObject:
    """Pedestrians walk along the sidewalk; cyclists ride at the outer lane edge."""
    speed = float(rng.uniform(*traffic.speeds[object_class]))
    length, width, height = _sample_dims(rng, object_class)
    if object_class is ObjectClass.PEDESTRIAN:
        offset = road.junction_half_width + road.sidewalk_width / 2.0
    else:
        offset = road.junction_half_width - width / 2.0 - 0.1
    x0, y0 = _rotate(-road.arm_length, -offset, heading)
    builder = _PathBuilder(t, x0, y0, heading, speed)
    builder.straight(2.0 * road.arm_length)
    return GroundTruthObject(
        object_id=0, object_class=object_class, length=length, width=width, height=height,
        segments=tuple(builder.segments),
    )


def generate_traffic(config, seed: Optional[int] = None) -> TrafficTimeline:
    """
    Generate the ground truth of a scenario.

    Args:
        config: ScenarioConfig
        seed: Overrides config.seed

    Returns:
        Timeline with ids assigned in order of appearance
    """
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng([seed, STREAM_TRAFFIC])
    if config.is_intersection:
        objects = _intersection_traffic(config, rng)
    else:
        objects = _highway_traffic(config, rng)

    objects.sort(key=lambda o: (o.t_start, o.segments[0].planar_state(o.t_start)[:2]))
    numbered = [
        GroundTruthObject(
            object_id=index + 1, object_class=o.object_class, length=o.length, width=o.width,
            height=o.height, segments=o.segments,
        )
        for index, o in enumerate(objects)
    ]
    logger.info(f"Generated {len(numbered)} ground-truth objects for '{config.name}'")
    return TrafficTimeline(numbered)


def single_vehicle(
    object_class: ObjectClass,
    start: Tuple[float, float],
    heading: float,
    speed: float,
    t_start: float = 0.0,
    t_end: float = math.inf,
    object_id: int = 1
) -> GroundTruthObject:
    """Scripted constant-velocity object, handy for tests and scripted scenes."""
    length, width, height = CLASS_DIMENSIONS[object_class]
    return GroundTruthObject(
        object_id=object_id, object_class=object_class, length=length, width=width, height=height,
        segments=(LinearSegment(t_start=t_start, t_end=t_end, origin=start, heading=heading, speed=speed),),
    )


def merge_timelines(parts: Sequence[GroundTruthObject]) -> TrafficTimeline:
    return TrafficTimeline(list(parts))

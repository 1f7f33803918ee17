"""
Redundancy checks: how each sensor's view of a track cluster enters the combination.
"""

from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np

from src.models.geometry import BoxArrays, bounding_box_points, boxes_from_objects, in_clear_fov
from src.models.schema import Dimensions, LocalObject, StateVector
from src.models.sensor import SensorMeta


class ContributionKind(str, Enum):
    REGULAR = "regular"
    UNEXPECTED = "unexpected"
    MISS = "miss"
    IRRELEVANT = "irrelevant"


class Contribution(NamedTuple):
    kind: ContributionKind
    # reporting sensor that coasts although it should see the cluster
    coasting_miss: bool = False


def _clear_view(points: np.ndarray, sensor: SensorMeta, blockers: Sequence[LocalObject]) -> bool:
    boxes = boxes_from_objects(blockers) if blockers else BoxArrays.empty()
    return in_clear_fov(points, sensor, boxes)


def classify_contribution(
    member: Optional[LocalObject],
    sensor: SensorMeta,
    estimate_state: StateVector,
    estimate_dims: Dimensions,
    blockers: Sequence[LocalObject]
) -> Contribution:
    """
    Classify one sensor's contribution to a cluster.

    Args:
        member: The sensor's track in the cluster, or None when it reports none
        sensor: Sensor under consideration
        estimate_state: Merged cluster state
        estimate_dims: Merged cluster extent
        blockers: The sensor's other confirmed objects (potential occluders)

    Returns:
        Contribution kind plus the coasting-miss marker
    """
    cluster_points = bounding_box_points(estimate_state, estimate_dims)
    if member is not None:
        if not member.status.coasting:
            own_points = bounding_box_points(member.state, member.dims)
            if not _clear_view(own_points, sensor, blockers):
                return Contribution(ContributionKind.UNEXPECTED)
            return Contribution(ContributionKind.REGULAR)
        return Contribution(
            ContributionKind.REGULAR,
            coasting_miss=_clear_view(cluster_points, sensor, blockers),
        )

    if _clear_view(cluster_points, sensor, blockers):
        return Contribution(ContributionKind.MISS)
    return Contribution(ContributionKind.IRRELEVANT)

"""
Association of system objects across frames to keep global ids persistent.
"""

import math
from typing import List, Sequence

import numpy as np

from src.fusion.types import FusionConfig, FusionState
from src.models.schema import Dimensions, SystemObject
from src.utils.assignment import gated_assignment


def smooth_dims(current: Dimensions, previous: Dimensions, alpha: float) -> Dimensions:
    """Exponential moving average of extents; circular for the heading."""
    heading = math.atan2(
        alpha * math.sin(current.heading) + (1 - alpha) * math.sin(previous.heading),
        alpha * math.cos(current.heading) + (1 - alpha) * math.cos(previous.heading),
    )
    return Dimensions(
        length=alpha * current.length + (1 - alpha) * previous.length,
        width=alpha * current.width + (1 - alpha) * previous.width,
        height=alpha * current.height + (1 - alpha) * previous.height,
        heading=heading,
    )


def associate_frames(
    current: Sequence[SystemObject],
    previous: Sequence[SystemObject],
    state: FusionState,
    config: FusionConfig = FusionConfig()
) -> List[SystemObject]:
    """
    Carry global ids over from the previous frame.

    Previous objects are predicted to the current time at constant velocity;
    a gated optimal assignment on position distance decides the matches.
    Unmatched current objects receive fresh ids in list order.
    """
    matched = {}
    if current and previous:
        predicted = np.array([
            obj.state.position + obj.state.velocity * (current[0].timestamp - obj.timestamp)
            for obj in previous
        ])
        positions = np.array([obj.state.position for obj in current])
        cost = np.linalg.norm(positions[:, None, :] - predicted[None, :, :], axis=2)
        for i, j in gated_assignment(cost, config.frame_gate).matches:
            matched[i] = previous[j]

    associated = []
    for i, obj in enumerate(current):
        predecessor = matched.get(i)
        if predecessor is None:
            associated.append(obj.model_copy(update={'global_id': state.allocate_id()}))
            continue
        associated.append(obj.model_copy(update={
            'global_id': predecessor.global_id,
            'dims': smooth_dims(obj.dims, predecessor.dims, config.smoothing),
        }))
    return associated

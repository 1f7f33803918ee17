"""
Merging of cluster members into one estimate by naive information fusion.
"""

import math
from typing import Sequence

import numpy as np

from src.fusion.types import FusedEstimate
from src.models.schema import Dimensions, LocalObject, StateVector, TrackStatus


def _information(covariance: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.inv(covariance)
    except np.linalg.LinAlgError:
        return np.linalg.pinv(covariance)


def circular_mean(angles: Sequence[float]) -> float:
    return math.atan2(sum(math.sin(a) for a in angles), sum(math.cos(a) for a in angles))


def merge(members: Sequence[LocalObject]) -> FusedEstimate:
    """
    Fuse cluster members.

    State and covariance by information weighting (cross-correlations ignored),
    extent by element-wise maximum, heading by circular mean. The fused object
    coasts only if every member coasts and carries the best member score.
    """
    if not members:
        raise ValueError("cannot merge an empty cluster")
    if len(members) == 1:
        only = members[0]
        return FusedEstimate(state=only.state, covariance=only.covariance, dims=only.dims, status=only.status)

    information = np.zeros((6, 6))
    weighted = np.zeros(6)
    for member in members:
        info = _information(member.covariance)
        information += info
        weighted += info @ member.state.to_array()
    covariance = _information(information)
    covariance = (covariance + covariance.T) / 2.0
    state = covariance @ weighted

    dims = Dimensions(
        length=max(m.dims.length for m in members),
        width=max(m.dims.width for m in members),
        height=max(m.dims.height for m in members),
        heading=circular_mean([m.dims.heading for m in members]),
    )
    status = TrackStatus(
        score=max(m.status.score for m in members),
        confirmed=any(m.status.confirmed for m in members),
        coasting=all(m.status.coasting for m in members),
    )
    return FusedEstimate(
        state=StateVector.from_array(state),
        covariance=covariance,
        dims=dims,
        status=status,
    )

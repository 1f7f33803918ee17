"""
Track-to-track clustering of synchronous confirmed local objects.
"""

import logging
from itertools import combinations
from typing import Dict, List, Tuple

import numpy as np

from src.fusion.merging import merge
from src.fusion.types import TrackCluster
from src.models.schema import LocalObject, LocalObjectList
from src.tracking.config import chi2_gate
from src.utils.assignment import gated_assignment

logger = logging.getLogger(__name__)

# Euclidean pre-filter; pairs farther apart are never evaluated
PREFILTER_DISTANCE = 30.0

Key = Tuple[int, int]


def t2t_distance(a: LocalObject, b: LocalObject) -> float:
    """Squared Mahalanobis distance of two tracks under their summed covariances."""
    difference = a.state.to_array() - b.state.to_array()
    combined = a.covariance + b.covariance
    try:
        return float(difference @ np.linalg.solve(combined, difference))
    except np.linalg.LinAlgError:
        return float(difference @ np.linalg.pinv(combined) @ difference)


class _Components:
    """Union-find that refuses to join components sharing a sensor."""

    def __init__(self, keys: List[Key]):
        self.parent: Dict[Key, Key] = {key: key for key in keys}
        self.sensors: Dict[Key, set] = {key: {key[0]} for key in keys}

    def find(self, key: Key) -> Key:
        root = key
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[key] != root:
            self.parent[key], key = root, self.parent[key]
        return root

    def union(self, a: Key, b: Key) -> bool:
        root_a, root_b = self.find(a), self.find(b)
        if root_a == root_b or self.sensors[root_a] & self.sensors[root_b]:
            return False
        keep, absorb = (root_a, root_b) if root_a < root_b else (root_b, root_a)
        self.parent[absorb] = keep
        self.sensors[keep] |= self.sensors.pop(absorb)
        return True


def candidate_pairs(objects: LocalObjectList, gate_probability: float = 0.99) -> List[Tuple[float, Key, Key]]:
    """Gated optimal pairings between each pair of sensors, as (distance, key, key)."""
    gate = chi2_gate(gate_probability, 6)
    by_sensor = {
        sensor_id: [o for o in objects.for_sensor(sensor_id) if o.status.confirmed]
        for sensor_id in sorted(objects.objects)
    }
    edges = []
    for first, second in combinations(sorted(by_sensor), 2):
        rows, cols = by_sensor[first], by_sensor[second]
        if not rows or not cols:
            continue
        row_pos = np.array([o.state.position for o in rows])
        col_pos = np.array([o.state.position for o in cols])
        cost = np.full((len(rows), len(cols)), np.inf)
        near = np.linalg.norm(row_pos[:, None, :] - col_pos[None, :, :], axis=2) <= PREFILTER_DISTANCE
        for i, j in zip(*np.nonzero(near)):
            cost[i, j] = t2t_distance(rows[i], cols[j])
        for i, j in gated_assignment(cost, gate).matches:
            edges.append((float(cost[i, j]), rows[i].key, cols[j].key))
    edges.sort()
    return edges


def cluster(objects: LocalObjectList, gate_probability: float = 0.99) -> List[TrackCluster]:
    """
    Group confirmed local objects into clusters.

    Pairwise associations are chained transitively, closest pairs first; a
    link that would put two tracks of one sensor in a cluster is skipped.
    Clusters are ordered by their smallest (sensor_id, track_id).
    """
    confirmed = [o for o in objects.all_objects() if o.status.confirmed]
    if not confirmed:
        return []
    lookup = {o.key: o for o in confirmed}
    components = _Components(list(lookup))
    for _, first, second in candidate_pairs(objects, gate_probability):
        components.union(first, second)

    groups: Dict[Key, List[LocalObject]] = {}
    for key in sorted(lookup):
        groups.setdefault(components.find(key), []).append(lookup[key])

    clusters = []
    for members in sorted(groups.values(), key=lambda group: group[0].key):
        members = sorted(members, key=lambda o: o.sensor_id)
        clusters.append(TrackCluster(members=tuple(members), estimate=merge(members)))
    logger.debug(f"Clustered {len(confirmed)} tracks into {len(clusters)} clusters")
    return clusters

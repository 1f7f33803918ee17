"""Central fusion pipeline: clustering, merging, frame association and plausibilization."""

from src.fusion.clustering import cluster, t2t_distance
from src.fusion.engine import FusionEngine, SensorContribution, evaluate_cluster, fuse_step
from src.fusion.frame_association import associate_frames
from src.fusion.merging import merge
from src.fusion.types import FusedEstimate, FusionConfig, FusionState, TrackCluster

__all__ = [
    'FusedEstimate',
    'FusionConfig',
    'FusionEngine',
    'FusionState',
    'SensorContribution',
    'TrackCluster',
    'associate_frames',
    'cluster',
    'evaluate_cluster',
    'fuse_step',
    'merge',
    't2t_distance',
]

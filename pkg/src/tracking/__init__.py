"""Per-sensor multi-object tracking."""

from src.tracking.config import TrackerConfig
from src.tracking.tracker import SensorTracker, Track, associate_and_update, manage_tracks, predict

__all__ = ['SensorTracker', 'Track', 'TrackerConfig', 'associate_and_update', 'manage_tracks', 'predict']

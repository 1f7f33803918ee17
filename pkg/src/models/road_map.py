"""
Digital road map: a binary occupancy grid of road (1) and non-road (0) squares.
"""

import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator
from scipy.spatial import cKDTree


class LaneGeometry(BaseModel):
    """Lane metadata used by the traffic generator and the plausibility limits."""

    model_config = ConfigDict(frozen=True)

    lane_count: int = Field(..., ge=1)
    lane_width: float = Field(3.5, gt=0)


class DigitalMap(BaseModel):
    """Grid map; row index grows with y, column index with x."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    origin: Tuple[float, float] = Field(..., description="Lower-left grid corner (m)")
    cell_size: float = Field(..., gt=0)
    grid: np.ndarray
    lanes: LaneGeometry

    _centers: Optional[np.ndarray] = PrivateAttr(default=None)
    _tree: Optional[cKDTree] = PrivateAttr(default=None)

    @field_validator('grid', mode='before')
    @classmethod
    def check_grid(cls, v) -> np.ndarray:
        grid = np.array(v, dtype=np.uint8)
        if grid.ndim != 2 or grid.size == 0:
            raise ValueError("map grid must be a non-empty 2D array")
        if not np.isin(grid, (0, 1)).all():
            raise ValueError("map grid values must be 0 or 1")
        grid.setflags(write=False)
        return grid

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape

    @property
    def half_diagonal(self) -> float:
        return self.cell_size * math.sqrt(2.0) / 2.0

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        """(x_min, x_max, y_min, y_max) of the grid."""
        rows, cols = self.grid.shape
        x0, y0 = self.origin
        return x0, x0 + cols * self.cell_size, y0, y0 + rows * self.cell_size

    def cell_of(self, x: float, y: float) -> Optional[Tuple[int, int]]:
        """Return (row, col) of the cell containing (x, y), or None outside the grid."""
        col = math.floor((x - self.origin[0]) / self.cell_size)
        row = math.floor((y - self.origin[1]) / self.cell_size)
        rows, cols = self.grid.shape
        if 0 <= row < rows and 0 <= col < cols:
            return row, col
        return None

    def is_road(self, x: float, y: float) -> bool:
        cell = self.cell_of(x, y)
        return cell is not None and bool(self.grid[cell])

    def road_cell_centers(self) -> np.ndarray:
        """(N, 2) array of road-cell centers."""
        if self._centers is None:
            rows, cols = np.nonzero(self.grid)
            centers = np.column_stack([
                self.origin[0] + (cols + 0.5) * self.cell_size,
                self.origin[1] + (rows + 0.5) * self.cell_size,
            ])
            self._centers = centers
        return self._centers

    def road_tree(self) -> Optional[cKDTree]:
        """KD-tree over road-cell centers; None when the map has no road."""
        if self._tree is None:
            centers = self.road_cell_centers()
            if len(centers) == 0:
                return None
            self._tree = cKDTree(centers)
        return self._tree


def _grid_axes(x_min: float, x_max: float, y_min: float, y_max: float, cell_size: float):
    cols = int(round((x_max - x_min) / cell_size))
    rows = int(round((y_max - y_min) / cell_size))
    xs = x_min + (np.arange(cols) + 0.5) * cell_size
    ys = y_min + (np.arange(rows) + 0.5) * cell_size
    return np.meshgrid(xs, ys)


def highway_map(
    length: float,
    lane_count: int = 4,
    lane_width: float = 3.5,
    margin: float = 20.0,
    cell_size: float = 0.5
) -> DigitalMap:
    """
    Straight multi-lane segment along +x.

    The carriageway covers 0 <= x < length and 0 <= y < lane_count * lane_width;
    a non-road margin surrounds it.
    """
    road_width = lane_count * lane_width
    cx, cy = _grid_axes(-margin, length + margin, -margin, road_width + margin, cell_size)
    grid = (cx >= 0.0) & (cx < length) & (cy >= 0.0) & (cy < road_width)
    return DigitalMap(
        origin=(-margin, -margin),
        cell_size=cell_size,
        grid=grid,
        lanes=LaneGeometry(lane_count=lane_count, lane_width=lane_width),
    )


def intersection_map(
    arm_length: float = 80.0,
    lanes_per_direction: int = 2,
    lane_width: float = 3.5,
    sidewalk_width: float = 2.0,
    cell_size: float = 0.5
) -> DigitalMap:
    """
    Four-way junction centred at the origin with legs along both axes.

    Sidewalks are part of the traversable area.
    """
    half_width = lanes_per_direction * lane_width + sidewalk_width
    cx, cy = _grid_axes(-arm_length, arm_length, -arm_length, arm_length, cell_size)
    grid = (np.abs(cx) < half_width) | (np.abs(cy) < half_width)
    return DigitalMap(
        origin=(-arm_length, -arm_length),
        cell_size=cell_size,
        grid=grid,
        lanes=LaneGeometry(lane_count=2 * lanes_per_direction, lane_width=lane_width),
    )

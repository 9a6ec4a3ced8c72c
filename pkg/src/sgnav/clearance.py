"""Euclidean distance fields and obstacle inflation for planning maps.

The distance field gives each cell its exact Euclidean distance (center to
center) to the nearest blocked cell, counting everything outside the map as
blocked.  Inflating the map by a clearance radius produces the planning map
whose "alert" cells keep geometric plans away from obstacles and the border.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import GridMap

DEFAULT_ALERT_RADIUS = 1.5  # cells: ~1 footprint + 0.5 safety margin


@dataclass(frozen=True)
class DistanceField:
    """Per-cell distance (cells) to the nearest blocked cell, 0 on obstacles."""

    values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def shape(self):
        return self.values.shape

    def to_csv(self, stream):
        """Row-major dump, one comma-separated row of full-precision reals per line."""
        for row in self.values:
            stream.write(",".join(repr(float(v)) for v in row) + "\n")


def distance_field(grid):
    """Exact Euclidean distance transform with the map border treated as blocked."""
    free = np.zeros((grid.height + 2, grid.width + 2), dtype=bool)
    free[1:-1, 1:-1] = ~grid.blocked
    dist = ndimage.distance_transform_edt(free)
    return DistanceField(np.ascontiguousarray(dist[1:-1, 1:-1]))


def build_alert_map(grid, field, r_alert):
    """Planning map: original obstacles plus free cells closer than r_alert.

    One field supports any radius, so different clearances never require a
    fresh transform.  The input map is left untouched.
    """
    if field.shape != (grid.height, grid.width):
        raise ValueError("distance field shape does not match map")
    if r_alert < 0:
        raise ValueError(f"r_alert must be nonnegative, got {r_alert}")
    return GridMap(grid.blocked | (field.values < r_alert))


def alert_cells(grid, planning_map):
    """Boolean mask of cells blocked by inflation only (not original obstacles)."""
    if planning_map.blocked.shape != grid.blocked.shape:
        raise ValueError("map shapes differ")
    return planning_map.blocked & ~grid.blocked

"""
The 'firstnature.geo' module includes the cost surface built from a land/water raster and the
least-cost distance computations run on it.
"""

from .cost_distance import (CostDistanceField, cost_distance, cost_distance_many,
                             cost_distance_to_points, snap_port)
from .raster import (FORCED_LAND, LAND, NODATA, WATER, AsciiGrid, CellCoord, CostSurface,
                      build_cost_surface, load_polygons, open_waterway, read_ascii_grid, region_mask,
                      write_ascii_grid)

__all__ = [
    'WATER',
    'LAND',
    'FORCED_LAND',
    'NODATA',
    'AsciiGrid',
    'CellCoord',
    'CostSurface',
    'CostDistanceField',
    'build_cost_surface',
    'cost_distance',
    'cost_distance_many',
    'cost_distance_to_points',
    'load_polygons',
    'open_waterway',
    'read_ascii_grid',
    'region_mask',
    'snap_port',
    'write_ascii_grid',
]

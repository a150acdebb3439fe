"""
Least-cost distances over a :py:class:`firstnature.geo.raster.CostSurface`.

Distances are expressed in water-kilometres: one kilometre of sea travel costs 1, one kilometre
over land or forced land costs `alpha`.
"""
import logging
import os
from typing import List, Optional, Sequence, Tuple, Union

import attr
import numpy as np
import pandas as pd
from scipy.sparse.csgraph import dijkstra

from firstnature.geo.raster import FORCED_LAND, LAND, NODATA, WATER, CellCoord, CostSurface
from firstnature.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

PORT_SNAP_RADIUS = 5
"""
Maximum distance, in cells, over which a port falling on land is moved to the nearest navigable cell.
"""

Point = Tuple[float, float]


@attr.s(frozen=True, eq=False)
class CostDistanceField:
    """
    Single-source least-cost distances. Unreachable cells hold `inf`.
    """
    source = attr.ib()  # type: CellCoord
    distances = attr.ib(repr=False)  # type: np.ndarray

    def __getitem__(self, coord: CellCoord) -> float:
        return float(self.distances[coord.row, coord.col])

    def is_reachable(self, coord: CellCoord) -> bool:
        return bool(np.isfinite(self.distances[coord.row, coord.col]))

    @property
    def n_reachable(self) -> int:
        return int(np.isfinite(self.distances).sum())

    def to_frame(self) -> pd.DataFrame:
        """
        Long format table with one `col,row,distance` line per cell, row-major.
        """
        height, width = self.distances.shape
        rows, cols = np.divmod(np.arange(height * width), width)
        return pd.DataFrame({'col': cols, 'row': rows, 'distance': self.distances.ravel()})

    def write_csv(self, path: Union[str, os.PathLike], header: Optional[str] = None) -> None:
        with open(path, 'w', newline='') as f:
            if header:
                f.write(header + '\n')
            self.to_frame().to_csv(f, index=False, float_format='%.10g')


def cost_distance(surface: CostSurface, source: CellCoord) -> CostDistanceField:
    """
    Single-source least-cost distances over the 8-connected grid. The edge between neighbouring cells
    `a` and `b` weighs the centroid-to-centroid step length (`cell_size` or `cell_size * sqrt(2)`)
    times `min(cost(a), cost(b))`.

    Parameters
    ----------
    surface
        Cost surface.
    source
        Source cell.

    Returns
    -------
    Distance field, `inf` where the source cannot reach.
    """
    node = surface.index(source)
    distances = dijkstra(surface.graph, directed=False, indices=node)
    distances = distances.reshape(surface.height, surface.width)
    if surface.cell_class(source) == NODATA:
        logger.warning('Source %s lies on a NODATA cell; every other cell is unreachable', source)
    return CostDistanceField(source=source, distances=distances)


def cost_distance_many(surface: CostSurface,
                       sources: Sequence[CellCoord],
                       n_jobs: Optional[int] = 1,
                       progress: bool = False) -> List[CostDistanceField]:
    """
    One Dijkstra run per source, optionally in parallel. Each run is independent, so the fields are
    identical to sequential runs.
    """
    return parallel_map(lambda src: cost_distance(surface, src), list(sources), n_jobs=n_jobs,
                        progress=progress, desc='cost distance')


def snap_port(surface: CostSurface, point: Point, radius: int = PORT_SNAP_RADIUS) -> Optional[CellCoord]:
    """
    Snap a port to its cell. A port landing on a land cell is moved to the nearest water or forced land
    cell within `radius` cells (Euclidean in cell units, ties to the smaller row then column).

    Returns
    -------
    The navigable cell, or `None` if there is none within the radius.
    """
    cell = surface.snap(*point)
    cls = surface.cell_class(cell)
    if cls in (WATER, FORCED_LAND):
        return cell

    best = None  # type: Optional[Tuple[float, int, int]]
    for dr in range(-radius, radius + 1):
        for dc in range(-radius, radius + 1):
            r2 = dr * dr + dc * dc
            if r2 > radius * radius:
                continue
            candidate = CellCoord(col=cell.col + dc, row=cell.row + dr)
            if not surface.contains(candidate):
                continue
            if surface.cell_class(candidate) not in (WATER, FORCED_LAND):
                continue
            key = (r2, candidate.row, candidate.col)
            if best is None or key < best:
                best = key
    if best is None:
        logger.warning('No navigable cell within %d cells of port at %s', radius, point)
        return None
    moved = CellCoord(col=best[2], row=best[1])
    logger.debug('Port at %s moved from %s (%s) to %s', point, cell, 'land' if cls == LAND else 'nodata', moved)
    return moved


def cost_distance_to_points(surface: CostSurface, source: Point, targets: Sequence[Point]) -> np.ndarray:
    """
    Least-cost distances from a source point to target points. Points are snapped to the cell containing
    them, i.e. the cell with the nearest centre.

    Parameters
    ----------
    surface
        Cost surface.
    source
        Source point in map coordinates.
    targets
        Target points in map coordinates.

    Returns
    -------
    Array of distances, one per target; `inf` marks targets the source cannot reach.
    """
    source_cell = surface.snap(*source)
    target_cells = [surface.snap(*target) for target in targets]
    field = cost_distance(surface, source_cell)
    out = np.array([field[cell] for cell in target_cells], dtype=float)
    n_unreachable = int(np.isinf(out).sum())
    if n_unreachable:
        logger.info('%d of %d targets unreachable from %s', n_unreachable, len(out), source)
    return out

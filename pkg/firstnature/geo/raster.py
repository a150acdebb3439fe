"""
Raster input and the cost surface over which least-cost distances are computed.

Cells are classified as water, land or forced land. Forced land cells are hydrologically water
but priced as land, which models shallow waters where goods had to be reloaded and carried.
NODATA cells are impassable.
"""
import json
import logging
import os
from typing import List, Optional, Sequence, Tuple, Union

import attr
import numpy as np
import shapely
from scipy import sparse
from shapely.geometry import box, shape
from shapely.geometry.base import BaseGeometry

from firstnature.exceptions import DataError, RasterFormatError

logger = logging.getLogger(__name__)

WATER = 0
LAND = 1
FORCED_LAND = 2
NODATA = -1

CELL_CLASS_NAMES = {WATER: 'water', LAND: 'land', FORCED_LAND: 'forced_land', NODATA: 'nodata'}

REQUIRED_HEADER_KEYS = ('ncols', 'nrows', 'cellsize')

# (row offset, col offset, step length in cells); the other four neighbours follow by symmetry
_HALF_NEIGHBOURHOOD = ((0, 1, 1.), (1, 0, 1.), (1, 1, np.sqrt(2.)), (1, -1, np.sqrt(2.)))


@attr.s(frozen=True)
class CellCoord:
    """
    Column and row index of a raster cell. Row 0 is the northernmost row, as in the ASCII grid body.
    """
    col = attr.ib(converter=int)  # type: int
    row = attr.ib(converter=int)  # type: int


@attr.s(frozen=True, eq=False)
class AsciiGrid:
    """
    Content of an ESRI ASCII grid file.
    """
    values = attr.ib(repr=False)  # type: np.ndarray
    xllcorner = attr.ib(converter=float)  # type: float
    yllcorner = attr.ib(converter=float)  # type: float
    cellsize = attr.ib(converter=float)  # type: float
    nodata_value = attr.ib(default=None)  # type: Optional[float]

    @property
    def nrows(self) -> int:
        return self.values.shape[0]

    @property
    def ncols(self) -> int:
        return self.values.shape[1]


def read_ascii_grid(path: Union[str, os.PathLike]) -> AsciiGrid:
    """
    Read an ESRI ASCII grid. The header holds `ncols`, `nrows`, `xllcorner`/`xllcenter`,
    `yllcorner`/`yllcenter`, `cellsize` and optionally `NODATA_value`, followed by `nrows`
    rows of space separated values, northernmost row first.

    Parameters
    ----------
    path
        Path to the grid file.

    Returns
    -------
    The parsed grid.
    """
    with open(path) as f:
        lines = [line.strip() for line in f if line.strip()]

    header = {}  # type: dict
    n_header = 0
    for line in lines:
        tokens = line.split()
        if len(tokens) != 2 or not tokens[0][0].isalpha():
            break
        header[tokens[0].lower()] = tokens[1]
        n_header += 1

    missing = [key for key in REQUIRED_HEADER_KEYS if key not in header]
    if missing:
        raise RasterFormatError(f"Malformed raster header in {path}: missing {missing}")
    try:
        ncols, nrows = int(header['ncols']), int(header['nrows'])
        cellsize = float(header['cellsize'])
        if 'xllcorner' in header:
            xll = float(header['xllcorner'])
        elif 'xllcenter' in header:
            xll = float(header['xllcenter']) - cellsize / 2
        else:
            raise RasterFormatError(f"Malformed raster header in {path}: missing xllcorner/xllcenter")
        if 'yllcorner' in header:
            yll = float(header['yllcorner'])
        elif 'yllcenter' in header:
            yll = float(header['yllcenter']) - cellsize / 2
        else:
            raise RasterFormatError(f"Malformed raster header in {path}: missing yllcorner/yllcenter")
        nodata = float(header['nodata_value']) if 'nodata_value' in header else None
    except ValueError as e:
        raise RasterFormatError(f"Malformed raster header in {path}: {e}") from e

    if ncols < 1 or nrows < 1 or cellsize <= 0:
        raise RasterFormatError(f"Raster {path} has non-positive dimensions or cell size")

    body = lines[n_header:]
    if len(body) != nrows:
        raise RasterFormatError(f"Raster {path} declares {nrows} rows but contains {len(body)}")
    try:
        values = np.array([[float(v) for v in row.split()] for row in body])
    except ValueError as e:
        raise RasterFormatError(f"Raster {path} contains non-numeric values: {e}") from e
    if values.ndim != 2 or values.shape[1] != ncols:
        raise RasterFormatError(f"Raster {path} rows do not all contain {ncols} values")

    return AsciiGrid(values=values, xllcorner=xll, yllcorner=yll, cellsize=cellsize, nodata_value=nodata)


def write_ascii_grid(grid: AsciiGrid, path: Union[str, os.PathLike]) -> None:
    """
    Write a grid in ESRI ASCII format. Integer valued grids are written without decimals.
    """
    values = grid.values
    integer = np.all(np.mod(values, 1) == 0)
    lines = [f"ncols {grid.ncols}",
             f"nrows {grid.nrows}",
             f"xllcorner {grid.xllcorner!r}",
             f"yllcorner {grid.yllcorner!r}",
             f"cellsize {grid.cellsize!r}"]
    if grid.nodata_value is not None:
        lines.append(f"NODATA_value {int(grid.nodata_value) if integer else grid.nodata_value}")
    for row in values:
        lines.append(' '.join(str(int(v)) if integer else repr(float(v)) for v in row))
    with open(path, 'w') as f:
        f.write('\n'.join(lines) + '\n')


def load_polygons(path: Union[str, os.PathLike], id_property: Optional[str] = None) -> \
        Union[List[BaseGeometry], dict]:
    """
    Read Polygon and MultiPolygon geometries from a GeoJSON file.

    Parameters
    ----------
    path
        GeoJSON file holding a FeatureCollection, a Feature or a bare geometry.
    id_property
        If given, return a dictionary keyed by this feature property instead of a list.

    Returns
    -------
    List of shapely geometries or a dictionary id -> geometry.
    """
    with open(path) as f:
        doc = json.load(f)

    if doc.get('type') == 'FeatureCollection':
        features = doc['features']
    elif doc.get('type') == 'Feature':
        features = [doc]
    else:
        features = [{'type': 'Feature', 'geometry': doc, 'properties': {}}]

    geometries = []
    ids = []
    for i, feature in enumerate(features):
        geom = shape(feature['geometry'])
        if geom.geom_type not in ('Polygon', 'MultiPolygon'):
            logger.warning('Skipping feature %d of %s with geometry type %s', i, path, geom.geom_type)
            continue
        if not geom.is_valid:
            raise DataError(f"Invalid polygon in feature {i} of {path}")
        geometries.append(geom)
        if id_property is not None:
            try:
                ids.append(str(feature['properties'][id_property]))
            except (KeyError, TypeError):
                raise DataError(f"Feature {i} of {path} has no property '{id_property}'")

    if id_property is not None:
        return dict(zip(ids, geometries))
    return geometries


@attr.s(eq=False)
class CostSurface:
    """
    Immutable raster of cell classes with traversal costs: water costs 1 per kilometre, land and
    forced land cost `alpha` per kilometre, NODATA cells cannot be entered.
    """
    cells = attr.ib(repr=False)  # type: np.ndarray
    cell_size = attr.ib(converter=float)  # type: float
    alpha = attr.ib(converter=float)  # type: float
    origin = attr.ib(default=(0., 0.), converter=tuple)  # type: Tuple[float, float]
    map_cell_size = attr.ib(default=None)  # type: Optional[float]

    def __attrs_post_init__(self):
        if self.alpha <= 1:
            raise ValueError(f"alpha must be larger than 1 (land strictly costlier than water), got {self.alpha}")
        if self.cell_size <= 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        cells = np.array(self.cells, dtype=np.int8)
        if cells.ndim != 2:
            raise ValueError('cells must be a 2-dimensional array')
        unknown = ~np.isin(cells, list(CELL_CLASS_NAMES))
        if unknown.any():
            raise ValueError(f"Unknown cell classes {np.unique(cells[unknown])}")
        cells.setflags(write=False)
        self.cells = cells
        if self.map_cell_size is None:
            self.map_cell_size = self.cell_size
        self._graph = self._build_graph()

    @classmethod
    def from_array(cls, land: np.ndarray, alpha: float, cell_size: float = 1.,
                   origin: Tuple[float, float] = (0., 0.)) -> 'CostSurface':
        """
        Build a surface from a 0/1 array (0 water, 1 land) with unit map units per kilometre.
        """
        return cls(cells=np.asarray(land), cell_size=cell_size, alpha=alpha, origin=origin)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def n_cells(self) -> int:
        return self.cells.size

    @property
    def unit_costs(self) -> np.ndarray:
        """
        Per-kilometre traversal cost of each cell, `inf` for NODATA.
        """
        costs = np.where(self.cells == WATER, 1., self.alpha)
        return np.where(self.cells == NODATA, np.inf, costs)

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        """
        (xmin, ymin, xmax, ymax) in map units.
        """
        x0, y0 = self.origin
        return x0, y0, x0 + self.width * self.map_cell_size, y0 + self.height * self.map_cell_size

    @property
    def graph(self) -> sparse.csr_matrix:
        """
        Upper triangular adjacency matrix of the 8-connected grid. Each edge carries the step length
        times the cheaper of its two endpoint costs.
        """
        return self._graph

    def contains(self, coord: CellCoord) -> bool:
        return 0 <= coord.col < self.width and 0 <= coord.row < self.height

    def index(self, coord: CellCoord) -> int:
        """
        Flat node index of a cell in row-major order.
        """
        if not self.contains(coord):
            raise ValueError(f"{coord} is outside the {self.width}x{self.height} raster")
        return coord.row * self.width + coord.col

    def cell_class(self, coord: CellCoord) -> int:
        return int(self.cells[coord.row, coord.col])

    def cell_center(self, coord: CellCoord) -> Tuple[float, float]:
        """
        Map coordinates of the centre of a cell.
        """
        x0, y0 = self.origin
        x = x0 + (coord.col + 0.5) * self.map_cell_size
        y = y0 + (self.height - coord.row - 0.5) * self.map_cell_size
        return x, y

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Arrays of shape (height, width) with the x and y coordinates of all cell centres.
        """
        x0, y0 = self.origin
        xs = x0 + (np.arange(self.width) + 0.5) * self.map_cell_size
        ys = y0 + (self.height - np.arange(self.height) - 0.5) * self.map_cell_size
        return np.meshgrid(xs, ys)

    def snap(self, x: float, y: float) -> CellCoord:
        """
        Snap a point to the cell whose centre is nearest, i.e. the cell containing it. Points on the
        outer edge of the raster snap inwards.

        Raises
        ------
        DataError
            If the point lies outside the raster extent.
        """
        xmin, ymin, xmax, ymax = self.extent
        if not (xmin <= x <= xmax and ymin <= y <= ymax):
            raise DataError(f"Point ({x}, {y}) is outside the raster extent {self.extent}")
        col = min(int(np.floor((x - xmin) / self.map_cell_size)), self.width - 1)
        row_from_bottom = min(int(np.floor((y - ymin) / self.map_cell_size)), self.height - 1)
        return CellCoord(col=col, row=self.height - 1 - row_from_bottom)

    def with_cells(self, mask: np.ndarray, cell_class: int) -> 'CostSurface':
        """
        Return a copy of the surface where all cells selected by `mask` have class `cell_class`.
        """
        cells = self.cells.copy()
        cells[np.asarray(mask, dtype=bool)] = cell_class
        return CostSurface(cells=cells, cell_size=self.cell_size, alpha=self.alpha, origin=self.origin,
                           map_cell_size=self.map_cell_size)

    def with_alpha(self, alpha: float) -> 'CostSurface':
        """
        Return a copy of the surface priced with a different land/water cost ratio.
        """
        return CostSurface(cells=self.cells.copy(), cell_size=self.cell_size, alpha=alpha, origin=self.origin,
                           map_cell_size=self.map_cell_size)

    def _build_graph(self) -> sparse.csr_matrix:
        height, width = self.cells.shape
        costs = self.unit_costs
        node_ids = np.arange(height * width).reshape(height, width)
        rows, cols, weights = [], [], []
        for dr, dc, step in _HALF_NEIGHBOURHOOD:
            # slices selecting every cell that has a neighbour at offset (dr, dc)
            r_from = slice(0, height - dr)
            r_to = slice(dr, height)
            c_from = slice(max(0, -dc), width - max(0, dc))
            c_to = slice(max(0, dc), width + min(0, dc))
            weight = step * self.cell_size * np.minimum(costs[r_from, c_from], costs[r_to, c_to])
            passable = np.isfinite(costs[r_from, c_from]) & np.isfinite(costs[r_to, c_to])
            rows.append(node_ids[r_from, c_from][passable])
            cols.append(node_ids[r_to, c_to][passable])
            weights.append(weight[passable])
        n = height * width
        return sparse.csr_matrix((np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))),
                                 shape=(n, n))


def build_cost_surface(raster_file: Union[str, os.PathLike],
                       alpha: float,
                       forced_land_regions: Optional[Sequence[BaseGeometry]] = None,
                       map_units_to_km: float = 1.) -> CostSurface:
    """
    Build a cost surface from an ASCII grid coded 0 = water, 1 = land.

    Parameters
    ----------
    raster_file
        Path to the ASCII grid.
    alpha
        Land/water cost ratio, must exceed 1.
    forced_land_regions
        Polygons (in raster map units) whose water cells are priced as land. Polygons not
        intersecting the raster are ignored with a warning.
    map_units_to_km
        Kilometres per raster map unit, e.g. 0.001 for rasters in metres.

    Returns
    -------
    The cost surface, ready for Dijkstra.
    """
    if alpha <= 1:
        raise ValueError(f"alpha must be larger than 1, got {alpha}")
    if map_units_to_km <= 0:
        raise ValueError(f"map_units_to_km must be positive, got {map_units_to_km}")

    grid = read_ascii_grid(raster_file)
    values = grid.values
    nodata = np.isnan(values)
    if grid.nodata_value is not None:
        nodata |= values == grid.nodata_value
    valid = values[~nodata]
    if not np.isin(valid, (WATER, LAND)).all():
        raise RasterFormatError(f"Raster {raster_file} must be coded 0 = water, 1 = land; "
                                f"found {np.unique(valid[~np.isin(valid, (WATER, LAND))])}")
    cells = np.where(nodata, NODATA, values).astype(np.int8)

    surface = CostSurface(cells=cells,
                          cell_size=grid.cellsize * map_units_to_km,
                          alpha=alpha,
                          origin=(grid.xllcorner, grid.yllcorner),
                          map_cell_size=grid.cellsize)

    mask = forced_land_mask(surface, forced_land_regions or [])
    n_forced = int(mask.sum())
    if n_forced:
        logger.info('Pricing %d shallow-water cells as land', n_forced)
        surface = surface.with_cells(mask, FORCED_LAND)
    return surface


def region_mask(surface: CostSurface, regions: Sequence[BaseGeometry], cell_class: Optional[int] = None) -> np.ndarray:
    """
    Boolean mask of the cells whose centre lies inside any of the regions, restricted to `cell_class` if given.
    """
    mask = np.zeros(surface.cells.shape, dtype=bool)
    bounds = box(*surface.extent)
    xs, ys = surface.cell_centers()
    for i, region in enumerate(regions):
        if not region.intersects(bounds):
            logger.warning('Region %d lies outside the raster bounds and is ignored', i)
            continue
        mask |= shapely.contains_xy(region, xs, ys)
    if cell_class is not None:
        mask &= surface.cells == cell_class
    return mask


def forced_land_mask(surface: CostSurface, regions: Sequence[BaseGeometry]) -> np.ndarray:
    """
    Boolean mask of water cells whose centre lies inside any of the regions.
    """
    return region_mask(surface, regions, cell_class=WATER)


def open_waterway(surface: CostSurface, regions: Sequence[BaseGeometry]) -> CostSurface:
    """
    Copy of the surface where the land cells inside the regions become navigable water, e.g. a breached
    isthmus.
    """
    mask = region_mask(surface, regions, cell_class=LAND)
    if not mask.any():
        raise DataError('No land cell lies inside the waterway regions')
    logger.info('Opening %d land cells to navigation', int(mask.sum()))
    return surface.with_cells(mask, WATER)

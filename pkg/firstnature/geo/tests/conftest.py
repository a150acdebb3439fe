import pytest
from shapely.geometry import Polygon

from firstnature.geo.raster import AsciiGrid, write_ascii_grid
from firstnature.geo.tests.utils import fjord_land_mask


@pytest.fixture(scope='module')
def fjord_raster(tmp_path_factory):
    path = tmp_path_factory.mktemp('raster') / 'fjord.asc'
    grid = AsciiGrid(values=fjord_land_mask().astype(float), xllcorner=100., yllcorner=200., cellsize=2.,
                     nodata_value=-9999)
    write_ascii_grid(grid, path)
    return path


@pytest.fixture(scope='module')
def shallows_polygon():
    # irregular polygon over the fjord in map units of the `fjord_raster` fixture
    return Polygon([(131.3, 220.6), (147.2, 222.4), (151.4, 229.2), (139.3, 231.1), (128.4, 227.3)])

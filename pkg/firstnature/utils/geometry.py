"""
Small planar geometry helpers. Geographic coordinates are projected with a local equirectangular
projection, which is accurate to well below a kilometre over a region the size of Denmark.
"""
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from shapely.geometry import Point
from shapely.geometry.base import BaseGeometry
from shapely.ops import transform

EARTH_RADIUS_KM = 6371.0088

CRS_OPTIONS = ('geographic', 'planar')


def _check_crs(crs: str) -> None:
    if crs not in CRS_OPTIONS:
        raise ValueError(f"Unknown coordinate system '{crs}'. Accepted values are {CRS_OPTIONS}")


def equirectangular(lon: Union[float, np.ndarray],
                    lat: Union[float, np.ndarray],
                    lat0: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Project longitude/latitude in degrees to kilometres east/north, scaling longitude by the cosine
    of the reference latitude `lat0`.
    """
    x = EARTH_RADIUS_KM * np.radians(lon) * np.cos(np.radians(lat0))
    y = EARTH_RADIUS_KM * np.radians(lat)
    return x, y


class KmProjection:
    """
    Maps points and shapely geometries to planar kilometres. With `crs='planar'` the coordinates are
    assumed to be kilometres already and pass through unchanged.

    Parameters
    ----------
    crs
        Either ``'geographic'`` (lon/lat degrees) or ``'planar'`` (km).
    lat0
        Reference latitude of the equirectangular projection. Ignored for planar coordinates.
    """

    def __init__(self, crs: str = 'geographic', lat0: Optional[float] = None):
        _check_crs(crs)
        if crs == 'geographic' and lat0 is None:
            raise ValueError('A reference latitude is required for geographic coordinates')
        self.crs = crs
        self.lat0 = lat0

    @classmethod
    def for_points(cls, points: Sequence[Tuple[float, float]], crs: str = 'geographic') -> 'KmProjection':
        """
        Projection centred on the mean latitude of `points`.
        """
        _check_crs(crs)
        lat0 = float(np.mean([p[1] for p in points])) if crs == 'geographic' and len(points) else None
        return cls(crs=crs, lat0=lat0 if lat0 is not None else 0.)

    def point(self, x: float, y: float) -> Point:
        if self.crs == 'planar':
            return Point(x, y)
        px, py = equirectangular(x, y, self.lat0)
        return Point(float(px), float(py))

    def xy(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if self.crs == 'planar':
            return np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return equirectangular(np.asarray(x, dtype=float), np.asarray(y, dtype=float), self.lat0)

    def geometry(self, geom: BaseGeometry) -> BaseGeometry:
        if self.crs == 'planar':
            return geom
        return transform(lambda x, y, z=None: equirectangular(np.asarray(x), np.asarray(y), self.lat0), geom)

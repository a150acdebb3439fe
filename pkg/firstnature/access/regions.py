"""
Assignment of parishes to the west, middle and east Limfjord regions and the reference group.
"""
import logging
from typing import Dict, Optional, Sequence, Tuple

import attr
import numpy as np
from shapely.geometry import LineString, Point
from shapely.geometry.base import BaseGeometry

from firstnature.access.market_access import ParishSite
from firstnature.utils.geometry import KmProjection

logger = logging.getLogger(__name__)

DEFAULT_DIVIDER = ((9.186837, 57.044185), (9.275585, 56.958951))
"""
Default (lon, lat) end points of the line separating the western from the eastern Limfjord.
"""

DEFAULT_BUFFER_KM = 20.


def _side(a: Tuple[float, float], b: Tuple[float, float], p: Tuple[float, float]) -> float:
    # sign of the cross product (b - a) x (p - a)
    return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])


def classify_region(parish: ParishSite,
                    limfjord_geometry: BaseGeometry,
                    coast_geometry: BaseGeometry,
                    divider: Tuple[Tuple[float, float], Tuple[float, float]] = DEFAULT_DIVIDER,
                    buffer_km: float = DEFAULT_BUFFER_KM,
                    crs: str = 'geographic') -> str:
    """
    Region of a parish. A parish belongs to the Limfjord if its centroid is closer to the fjord than to the
    open coast. Limfjord parishes within `buffer_km` of the divider are 'middle', the others 'west' or
    'east' depending on the side of the divider they lie on. All other parishes are 'reference'.

    Parameters
    ----------
    parish
        Parish to classify.
    limfjord_geometry
        Fjord waters (polygon or lines) in the parish coordinate system.
    coast_geometry
        Open coastline in the parish coordinate system.
    divider
        Two end points of the divider line.
    buffer_km
        Half-width of the middle region.
    crs
        ``'geographic'`` for lon/lat degrees or ``'planar'`` for coordinates in kilometres.

    Returns
    -------
    One of 'west', 'middle', 'east', 'reference'.
    """
    return RegionClassifier(limfjord_geometry, coast_geometry, divider=divider, buffer_km=buffer_km,
                            crs=crs).classify(parish)


class RegionClassifier:
    """
    Projects the reference geometries once and classifies many parishes against them.
    """

    def __init__(self,
                 limfjord_geometry: BaseGeometry,
                 coast_geometry: BaseGeometry,
                 divider: Tuple[Tuple[float, float], Tuple[float, float]] = DEFAULT_DIVIDER,
                 buffer_km: float = DEFAULT_BUFFER_KM,
                 crs: str = 'geographic'):
        a, b = (tuple(map(float, p)) for p in divider)
        if a == b:
            raise ValueError(f"Degenerate divider: both end points are {a}")
        if buffer_km < 0:
            raise ValueError(f"buffer_km must be nonnegative, got {buffer_km}")
        self.projection = KmProjection(crs=crs, lat0=(a[1] + b[1]) / 2 if crs == 'geographic' else None)
        self.buffer_km = buffer_km
        self.limfjord = self.projection.geometry(limfjord_geometry)
        self.coast = self.projection.geometry(coast_geometry)
        pa, pb = self.projection.point(*a), self.projection.point(*b)
        self.divider = LineString([pa, pb])
        self._a, self._b = (pa.x, pa.y), (pb.x, pb.y)
        # a point far to the west of the divider midpoint fixes which side of the line is west
        mid = ((pa.x + pb.x) / 2, (pa.y + pb.y) / 2)
        self._west_sign = np.sign(_side(self._a, self._b, (mid[0] - 1e6, mid[1])))
        if self._west_sign == 0:
            raise ValueError('The divider runs exactly east-west; west and east sides are undefined')

    def is_limfjord(self, point: Point) -> bool:
        return point.distance(self.limfjord) < point.distance(self.coast)

    def classify(self, parish: ParishSite) -> str:
        point = self.projection.point(*parish.centroid)
        if not self.is_limfjord(point):
            return 'reference'
        if point.distance(self.divider) <= self.buffer_km:
            return 'middle'
        side = np.sign(_side(self._a, self._b, (point.x, point.y)))
        return 'west' if side == self._west_sign else 'east'

    def classify_all(self, parishes: Sequence[ParishSite], keep_given: bool = False) -> Dict[str, str]:
        """
        Regions keyed by parish id. With `keep_given`, regions already present on the parish are kept.
        """
        regions = {}
        for parish in parishes:
            if keep_given and parish.region is not None:
                regions[parish.id] = parish.region
            else:
                regions[parish.id] = self.classify(parish)
        counts = {r: sum(v == r for v in regions.values()) for r in ('west', 'middle', 'east', 'reference')}
        logger.info('Region assignment: %s', counts)
        return regions


def assign_regions(parishes: Sequence[ParishSite],
                   limfjord_geometry: Optional[BaseGeometry] = None,
                   coast_geometry: Optional[BaseGeometry] = None,
                   **kwargs) -> list:
    """
    Return copies of the parishes with their region set. Parishes without a region in the input require
    both geometries.
    """
    if all(parish.region is not None for parish in parishes):
        return list(parishes)
    if limfjord_geometry is None or coast_geometry is None:
        missing = [p.id for p in parishes if p.region is None]
        raise ValueError(f"Parishes {missing[:5]} have no region and no Limfjord/coast geometry was given")
    classifier = RegionClassifier(limfjord_geometry, coast_geometry, **kwargs)
    regions = classifier.classify_all(parishes, keep_given=True)
    return [attr.evolve(parish, region=regions[parish.id]) for parish in parishes]

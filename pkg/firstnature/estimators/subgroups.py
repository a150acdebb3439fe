"""
Alternative estimation samples for robustness sweeps. Each subgroup is defined on parish geography: distance to the
coast, to the Limfjord and to the nearest market town, and membership of the Copenhagen area.
"""
import logging
import os
from typing import Sequence, Tuple, Union

import numpy as np
import pandas as pd
import shapely
from shapely.geometry import MultiPoint, Point
from shapely.geometry.base import BaseGeometry

from firstnature.access.market_access import ParishSite
from firstnature.exceptions import DataError
from firstnature.utils.geometry import KmProjection

logger = logging.getLogger(__name__)

COPENHAGEN = (12.568337, 55.676098)
COPENHAGEN_RADIUS_KM = 25.

SUBGROUPS = ('all', 'coastal', 'no_copenhagen', 'far_from_limfjord', 'market_town')

SUBGROUP_LABELS = {'coastal': 'A', 'no_copenhagen': 'B', 'far_from_limfjord': 'C', 'market_town': 'D'}

GEOGRAPHY_COLUMNS = ['parish_id', 'dist_coast_km', 'dist_limfjord_km', 'dist_market_town_km', 'copenhagen']


def parish_geography(parishes: Sequence[ParishSite],
                     coast_geometry: BaseGeometry,
                     limfjord_geometry: BaseGeometry,
                     market_towns: Union[BaseGeometry, Sequence[Tuple[float, float]], None] = None,
                     copenhagen: Union[BaseGeometry, Tuple[float, float]] = COPENHAGEN,
                     copenhagen_radius_km: float = COPENHAGEN_RADIUS_KM,
                     crs: str = 'geographic') -> pd.DataFrame:
    """
    Distances in kilometres from every parish centroid to the coast, the Limfjord and the nearest market town,
    and whether the centroid lies in the Copenhagen area.

    Parameters
    ----------
    parishes
        Parish centroids.
    coast_geometry, limfjord_geometry
        Reference geometries in the coordinate system of the centroids.
    market_towns
        Market town locations. Without market towns the distance is missing.
    copenhagen
        Copenhagen area polygon, or a centre point combined with `copenhagen_radius_km`.
    copenhagen_radius_km
        Radius of the Copenhagen area around a centre point.
    crs
        ``'geographic'`` for lon/lat degrees or ``'planar'`` for kilometres.
    """
    if not len(parishes):
        raise ValueError('No parishes given')
    projection = KmProjection.for_points([p.centroid for p in parishes], crs=crs)
    x, y = projection.xy(np.array([p.centroid[0] for p in parishes]), np.array([p.centroid[1] for p in parishes]))
    points = shapely.points(x, y)

    frame = pd.DataFrame({'parish_id': [p.id for p in parishes]})
    frame['dist_coast_km'] = shapely.distance(points, projection.geometry(coast_geometry))
    frame['dist_limfjord_km'] = shapely.distance(points, projection.geometry(limfjord_geometry))
    if market_towns is None:
        frame['dist_market_town_km'] = np.nan
    else:
        towns = market_towns if isinstance(market_towns, BaseGeometry) else MultiPoint([tuple(t) for t in market_towns])
        frame['dist_market_town_km'] = shapely.distance(points, projection.geometry(towns))
    if isinstance(copenhagen, BaseGeometry) and not isinstance(copenhagen, Point):
        area = projection.geometry(copenhagen)
    else:
        centre = copenhagen if isinstance(copenhagen, Point) else Point(*copenhagen)
        area = projection.geometry(centre).buffer(copenhagen_radius_km)
    frame['copenhagen'] = shapely.contains_xy(area, x, y)
    return frame[GEOGRAPHY_COLUMNS]


def subgroup_parishes(geography: pd.DataFrame,
                      treated: pd.Series,
                      subgroup: str,
                      coast_km: float = 5.,
                      limfjord_km: float = 100.,
                      market_town_km: float = 5.) -> list:
    """
    Parish ids in a subgroup.

    Parameters
    ----------
    geography
        Output of :py:func:`parish_geography`.
    treated
        Treatment indicator indexed by parish id.
    subgroup
        One of

         - ``'all'`` - every parish.

         - ``'coastal'`` - parishes within `coast_km` of the coast.

         - ``'no_copenhagen'`` - parishes outside the Copenhagen area.

         - ``'far_from_limfjord'`` - treated parishes and control parishes at least `limfjord_km` from the
           Limfjord.

         - ``'market_town'`` - parishes within `market_town_km` of a market town.
    """
    if subgroup not in SUBGROUPS:
        raise ValueError(f"Unknown subgroup '{subgroup}'. Accepted values are {SUBGROUPS}")
    geo = geography.set_index('parish_id')
    is_treated = treated.reindex(geo.index).fillna(0).astype(bool)
    if subgroup == 'all':
        keep = pd.Series(True, index=geo.index)
    elif subgroup == 'coastal':
        keep = geo['dist_coast_km'] < coast_km
    elif subgroup == 'no_copenhagen':
        keep = ~geo['copenhagen'].astype(bool)
    elif subgroup == 'far_from_limfjord':
        keep = is_treated | (geo['dist_limfjord_km'] >= limfjord_km)
    else:
        if geo['dist_market_town_km'].isna().all():
            raise DataError('The market town subgroup requires market town locations')
        keep = geo['dist_market_town_km'] < market_town_km
    return list(geo.index[keep.to_numpy()])


def select_subgroup(panel: pd.DataFrame,
                    geography: pd.DataFrame,
                    subgroup: str,
                    treatment: str = 'treatment_dummy',
                    unit: str = 'parish_id',
                    **thresholds) -> pd.DataFrame:
    """
    Restrict a parish panel to a subgroup, see :py:func:`subgroup_parishes`. Raises :py:class:`DataError` if the
    subgroup has no treated or no control parishes left.
    """
    treated = panel.groupby(unit)[treatment].max()
    keep = set(subgroup_parishes(geography, treated, subgroup, **thresholds))
    out = panel.loc[panel[unit].isin(keep)]
    kept = treated.reindex(sorted(keep & set(treated.index)))
    n_treated, n_control = int((kept == 1).sum()), int((kept == 0).sum())
    if not n_treated or not n_control:
        raise DataError(f"Subgroup '{subgroup}' has {n_treated} treated and {n_control} control parishes")
    logger.info("Subgroup '%s': %d treated and %d control parishes", subgroup, n_treated, n_control)
    return out




def load_geography(path: Union[str, os.PathLike]) -> pd.DataFrame:
    """
    Read a parish geography table written from :py:func:`parish_geography`.
    """
    frame = pd.read_csv(path, comment='#', dtype={'parish_id': str})
    missing = set(GEOGRAPHY_COLUMNS) - set(frame.columns)
    if missing:
        raise DataError(f"{path} is missing columns {sorted(missing)}")
    frame['copenhagen'] = frame['copenhagen'].astype(str).str.strip().str.lower().isin(('1', 'true'))
    return frame[GEOGRAPHY_COLUMNS]

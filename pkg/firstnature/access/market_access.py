"""
Parish market access under a baseline port set H and a counterfactual port set H*.

Market access of parish p given ports H is the sum over reachable ports h of (CostDist(p, h) + 1) ** theta,
with theta < 0. The +1 offset equals one kilometre of sea travel.
"""
import logging
import os
from typing import Iterable, List, Optional, Sequence, Set, Tuple, Union

import attr
import numpy as np
import pandas as pd

from firstnature.exceptions import DataError, UnreachableParishError
from firstnature.geo.cost_distance import cost_distance, snap_port
from firstnature.geo.raster import CostSurface
from firstnature.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

DEFAULT_THETA = -1.
DEFAULT_ALPHA = 10.
THETA_GRID = (-1., -2., -4., -8., -16.)
ALPHA_GRID = (5., 10., 20., 50.)

MA_COLUMNS = ['parish_id', 'ma_before', 'ma_after', 'delta_log_ma', 'theta', 'alpha']

REGIONS = ('west', 'middle', 'east', 'reference')


def _as_location(value) -> Tuple[float, float]:
    x, y = value
    return float(x), float(y)


@attr.s(frozen=True)
class Port:
    """
    A port with its membership in the baseline (H) and counterfactual (H*) sets. Locations are in the
    map coordinates of the cost surface.
    """
    id = attr.ib(converter=str)  # type: str
    location = attr.ib(converter=_as_location)  # type: Tuple[float, float]
    in_baseline = attr.ib(default=True, converter=bool)  # type: bool
    in_counterfactual = attr.ib(default=True, converter=bool)  # type: bool


@attr.s(frozen=True)
class ParishSite:
    """
    A parish represented by its centroid.
    """
    id = attr.ib(converter=str)  # type: str
    centroid = attr.ib(converter=_as_location)  # type: Tuple[float, float]
    region = attr.ib(default=None)  # type: Optional[str]

    @region.validator
    def _check_region(self, attribute, value):
        if value is not None and value not in REGIONS:
            raise ValueError(f"Unknown region '{value}'. Accepted values are {REGIONS}")


@attr.s(frozen=True)
class MarketAccessRecord:
    parish_id = attr.ib()  # type: str
    ma_before = attr.ib()  # type: float
    ma_after = attr.ib()  # type: float
    delta_log_ma = attr.ib()  # type: float
    theta = attr.ib()  # type: float
    alpha = attr.ib(default=np.nan)  # type: float


def baseline_ports(ports: Iterable[Port]) -> List[Port]:
    return [port for port in ports if port.in_baseline]


def counterfactual_ports(ports: Iterable[Port]) -> List[Port]:
    return [port for port in ports if port.in_counterfactual]


def check_port_sets(ports: Sequence[Port]) -> None:
    """
    Check that H is nonempty and contained in H*.
    """
    before = baseline_ports(ports)
    if not before:
        raise ValueError('The baseline port set H is empty')
    outside = [port.id for port in before if not port.in_counterfactual]
    if outside:
        raise ValueError(f"Ports {outside} are in the baseline set but not in the counterfactual set")
    if len(counterfactual_ports(ports)) == len(before):
        logger.info('The counterfactual port set equals the baseline set; every delta log MA is 0')


def _check_theta(theta: float) -> None:
    if not theta < 0:
        raise ValueError(f"theta must be negative, got {theta}")


def market_access_from_distances(distances: np.ndarray, theta: float) -> np.ndarray:
    """
    Evaluate the market access sum on a (parishes, ports) cost-distance matrix. Infinite distances
    contribute 0.
    """
    _check_theta(theta)
    distances = np.atleast_2d(np.asarray(distances, dtype=float))
    terms = np.zeros_like(distances)
    reachable = np.isfinite(distances)
    terms[reachable] = (distances[reachable] + 1.) ** theta
    return terms.sum(axis=1)


def market_access(parish: ParishSite, ports: Sequence[Port], theta: float, surface: CostSurface) -> float:
    """
    Market access of a single parish.

    Parameters
    ----------
    parish
        Parish whose centroid is snapped to the surface.
    ports
        Port subset over which the sum runs.
    theta
        Distance elasticity, negative.
    surface
        Cost surface.

    Returns
    -------
    Market access, in (0, len(ports)].

    Raises
    ------
    UnreachableParishError
        If no port can be reached from the parish.
    """
    _check_theta(theta)
    if not ports:
        raise ValueError('The port set is empty')
    field = cost_distance(surface, surface.snap(*parish.centroid))
    distances = []
    for port in ports:
        cell = snap_port(surface, port.location)
        distances.append(np.inf if cell is None else field[cell])
    ma = float(market_access_from_distances(np.array([distances]), theta)[0])
    if ma == 0:
        raise UnreachableParishError(f"Parish {parish.id} cannot reach any of {len(ports)} ports")
    return ma


def delta_log_ma(parish: ParishSite,
                 ports: Sequence[Port],
                 theta: float,
                 surface: CostSurface,
                 surface_after: Optional[CostSurface] = None) -> MarketAccessRecord:
    """
    Change in log market access from H to H*.

    Parameters
    ----------
    parish
        Parish.
    ports
        Full port registry; membership flags define H and H*.
    theta
        Distance elasticity.
    surface
        Cost surface for MA under H.
    surface_after
        Cost surface for MA under H*. Defaults to `surface`.

    Returns
    -------
    The market access record of the parish.
    """
    check_port_sets(ports)
    after_surface = surface if surface_after is None else surface_after
    ma_before = market_access(parish, baseline_ports(ports), theta, surface)
    ma_after = market_access(parish, counterfactual_ports(ports), theta, after_surface)
    return MarketAccessRecord(parish_id=parish.id,
                              ma_before=ma_before,
                              ma_after=ma_after,
                              delta_log_ma=float(np.log(ma_after) - np.log(ma_before)),
                              theta=theta,
                              alpha=surface.alpha)


def port_distance_matrix(parishes: Sequence[ParishSite],
                         ports: Sequence[Port],
                         surface: CostSurface,
                         n_jobs: Optional[int] = 1,
                         progress: bool = False) -> pd.DataFrame:
    """
    Cost distances between every parish and every port, one Dijkstra run per port. Distances are
    symmetric, so running from the ports is equivalent to running from the parishes and much cheaper.

    Returns
    -------
    Frame indexed by parish id with one column per port id; `inf` marks unreachable pairs.
    """
    parish_cells = [surface.snap(*parish.centroid) for parish in parishes]
    rows = np.array([cell.row for cell in parish_cells], dtype=int)
    cols = np.array([cell.col for cell in parish_cells], dtype=int)

    def distances_from(port: Port) -> np.ndarray:
        cell = snap_port(surface, port.location)
        if cell is None:
            logger.warning('Port %s cannot be placed on navigable water and is unreachable', port.id)
            return np.full(len(parishes), np.inf)
        return cost_distance(surface, cell).distances[rows, cols]

    columns = parallel_map(distances_from, list(ports), n_jobs=n_jobs, progress=progress, desc='port distances')
    matrix = np.column_stack(columns) if columns else np.empty((len(parishes), 0))
    return pd.DataFrame(matrix, index=pd.Index([p.id for p in parishes], name='parish_id'),
                        columns=[p.id for p in ports])


def market_access_records(distances_before: pd.DataFrame,
                          distances_after: pd.DataFrame,
                          theta: float,
                          alpha: float = np.nan) -> pd.DataFrame:
    """
    Market access records from precomputed distance matrices, one per port set. Parishes with MA(H) = 0
    are logged and excluded.

    Returns
    -------
    Frame with columns `parish_id, ma_before, ma_after, delta_log_ma, theta, alpha`. The ids of excluded
    parishes are stored in ``frame.attrs['excluded']``.
    """
    ma_before = market_access_from_distances(distances_before.to_numpy(), theta)
    ma_after = market_access_from_distances(distances_after.reindex(distances_before.index).to_numpy(), theta)
    unreachable = ma_before == 0
    excluded = list(distances_before.index[unreachable])
    for parish_id in excluded:
        logger.warning('Parish %s cannot reach any baseline port and is excluded', parish_id)
    keep = ~unreachable
    with np.errstate(divide='ignore'):
        delta = np.log(ma_after[keep]) - np.log(ma_before[keep])
    frame = pd.DataFrame({'parish_id': distances_before.index[keep].astype(str),
                          'ma_before': ma_before[keep],
                          'ma_after': ma_after[keep],
                          'delta_log_ma': delta,
                          'theta': theta,
                          'alpha': alpha}, columns=MA_COLUMNS)
    frame.attrs['excluded'] = excluded
    return frame.reset_index(drop=True)


def compute_market_access(parishes: Sequence[ParishSite],
                          ports: Sequence[Port],
                          theta: float,
                          surface: CostSurface,
                          surface_after: Optional[CostSurface] = None,
                          n_jobs: Optional[int] = 1,
                          progress: bool = False) -> pd.DataFrame:
    """
    Market access records for every parish. See :py:func:`delta_log_ma` for the semantics and
    :py:func:`market_access_records` for the output.
    """
    _check_theta(theta)
    check_port_sets(ports)
    before_ports = baseline_ports(ports)
    after_ports = counterfactual_ports(ports)
    before = port_distance_matrix(parishes, before_ports, surface, n_jobs=n_jobs, progress=progress)
    if surface_after is None:
        after = port_distance_matrix(parishes, [p for p in after_ports if not p.in_baseline], surface,
                                     n_jobs=n_jobs, progress=progress)
        after = pd.concat([before, after], axis=1)
    else:
        after = port_distance_matrix(parishes, after_ports, surface_after, n_jobs=n_jobs, progress=progress)
    logger.info('Computed market access for %d parishes over %d/%d ports', len(parishes), len(before_ports),
                len(after_ports))
    return market_access_records(before, after, theta, alpha=surface.alpha)


def standardize(values: Union[pd.Series, np.ndarray]) -> Union[pd.Series, np.ndarray]:
    """
    Zero mean, unit (population) variance version of a treatment intensity.
    """
    arr = np.asarray(values, dtype=float)
    sd = arr.std()
    if sd == 0 or not np.isfinite(sd):
        raise ValueError('Cannot standardize a constant series')
    out = (arr - arr.mean()) / sd
    if isinstance(values, pd.Series):
        return pd.Series(out, index=values.index, name=values.name)
    return out


def eligible_ports(sound_toll: pd.DataFrame, min_observations: int = 2) -> Set[str]:
    """
    Ports observed in the toll records at least `min_observations` times.
    """
    if min_observations < 1:
        raise ValueError(f"min_observations must be positive, got {min_observations}")
    observed = sound_toll.loc[sound_toll['passages'] > 0]
    counts = observed.groupby(observed['port_id'].astype(str))['passages'].size()
    return set(counts.index[counts >= min_observations])


def _read_locations(frame: pd.DataFrame, path) -> np.ndarray:
    if {'lon', 'lat'} <= set(frame.columns):
        return frame[['lon', 'lat']].to_numpy(dtype=float)
    if {'x', 'y'} <= set(frame.columns):
        return frame[['x', 'y']].to_numpy(dtype=float)
    raise DataError(f"{path} must contain lon/lat or x/y columns")


def _as_flag(series: pd.Series) -> pd.Series:
    mapping = {'1': True, '0': False, 'true': True, 'false': False, 'yes': True, 'no': False}
    flags = series.astype(str).str.strip().str.lower().map(mapping)
    if flags.isna().any():
        raise DataError(f"Unrecognised flag values {sorted(series[flags.isna()].astype(str).unique())}")
    return flags.astype(bool)


def load_ports(path: Union[str, os.PathLike]) -> List[Port]:
    """
    Read a port registry with columns `id, lon, lat, in_baseline, in_counterfactual`.
    """
    frame = pd.read_csv(path, comment='#', dtype={'id': str})
    missing = {'id', 'in_baseline', 'in_counterfactual'} - set(frame.columns)
    if missing:
        raise DataError(f"{path} is missing columns {sorted(missing)}")
    locations = _read_locations(frame, path)
    baseline = _as_flag(frame['in_baseline'])
    counterfactual = _as_flag(frame['in_counterfactual'])
    return [Port(id=i, location=loc, in_baseline=b, in_counterfactual=c)
            for i, loc, b, c in zip(frame['id'], locations, baseline, counterfactual)]


def load_parishes(path: Union[str, os.PathLike]) -> List[ParishSite]:
    """
    Read a parish registry with columns `id, lon, lat` and an optional `region`.
    """
    frame = pd.read_csv(path, comment='#', dtype={'id': str})
    if 'id' not in frame.columns:
        raise DataError(f"{path} is missing the id column")
    if frame['id'].duplicated().any():
        raise DataError(f"{path} contains duplicated parish ids")
    locations = _read_locations(frame, path)
    regions = frame['region'].astype(object).where(frame['region'].notna(), None) if 'region' in frame.columns \
        else [None] * len(frame)
    try:
        return [ParishSite(id=i, centroid=loc, region=r) for i, loc, r in zip(frame['id'], locations, regions)]
    except ValueError as e:
        raise DataError(f"{path}: {e}") from e

"""
A synthetic peninsula cut by a fjord whose western mouth is a strip of land that can be opened. Every input of the
analysis (raster, parishes, ports, census records, toll records, findings and soil shares) is simulated from known
parameters, so the estimators can be checked against the ground truth.
"""
import json
import logging
import os
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd
from shapely.geometry import MultiLineString, Polygon, box, mapping

from firstnature.access.market_access import ParishSite, Port
from firstnature.estimators.subgroups import parish_geography
from firstnature.exceptions import DataError
from firstnature.geo.raster import LAND, WATER, AsciiGrid, CostSurface, write_ascii_grid
from firstnature.paneldata.census import CENSUS_YEARS
from firstnature.paneldata.trade import LOCATIONS, POST_YEAR, TRADE_YEARS
from firstnature.utils.data import Bunch

logger = logging.getLogger(__name__)

__all__ = ['SyntheticWorld',
           'generate_synthetic_world',
           'write_synthetic_world']

REFERENCE_YEAR = 1801

DEFAULT_EVENT_EFFECTS = {1901: 0.25}

DEFAULT_TRADE_EFFECTS = {'west': 1.0}

SOIL_TYPES = ('clay', 'sand', 'moraine', 'peat', 'marsh')

# occupation codes and their frequencies; '' is a missing code
HISCO_CODES = ('61110', '62105', '61220', '71000', '83110', '95410', '21000', '31000', '41000', '51000', '01000', '')
HISCO_WEIGHTS = (.30, .10, .05, .08, .07, .05, .06, .04, .05, .08, .02, .10)

# sea margins in cells
NORTH_SEA_ROWS = 3
EAST_SEA_COLS = 4

PERIOD = (750, 1500)


class SyntheticWorld(Bunch):
    """
    Synthetic inputs with the fields `surface` (channel closed), `channel`, `parishes`, `parish_polygons`,
    `ports`, `census`, `counties`, `sound_toll`, `port_locations`, `findings`, `soil`, `geography` and
    `ground_truth`.
    """


def _check_positive(**kwargs) -> None:
    for name, value in kwargs.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")


def _layout(nrows: int, ncols: int, channel_col: int, channel_width: int) -> Tuple[np.ndarray, Tuple[int, int]]:
    """
    Land/water cells with the channel closed and the fjord rows.
    """
    if channel_col < 1 or channel_col + channel_width > ncols - EAST_SEA_COLS - 6:
        raise DataError(f"Channel strip at columns {channel_col}-{channel_col + channel_width - 1} does not fit "
                        f"between the western sea and the fjord of a raster with {ncols} columns")
    cells = np.full((nrows, ncols), LAND, dtype=np.int8)
    cells[:, :channel_col] = WATER
    cells[:, ncols - EAST_SEA_COLS:] = WATER
    cells[:NORTH_SEA_ROWS] = WATER
    fjord = (nrows // 2 - 1, nrows // 2 + 2)
    cells[fjord[0]:fjord[1], channel_col + channel_width:ncols - EAST_SEA_COLS] = WATER
    return cells, fjord


def _place_parishes(cells: np.ndarray,
                    fjord: Tuple[int, int],
                    fjord_cols: Tuple[int, int],
                    channel: Tuple[int, int],
                    n_parishes: int,
                    rng: np.random.Generator) -> List[Tuple[int, int]]:
    """
    Parish cells at least two cells apart, half of them on the fjord banks.
    """
    nrows, ncols = cells.shape
    land = np.argwhere(cells == LAND)
    land = land[(land[:, 0] >= NORTH_SEA_ROWS + 1) & (land[:, 0] <= nrows - 2) &
                (land[:, 1] >= 1) & (land[:, 1] <= ncols - EAST_SEA_COLS - 2)]
    in_channel = (land[:, 1] >= channel[0]) & (land[:, 1] < channel[1]) & \
        (land[:, 0] >= fjord[0]) & (land[:, 0] < fjord[1])
    land = land[~in_channel]
    bank = np.isin(land[:, 0], (fjord[0] - 1, fjord[1])) & (land[:, 1] >= fjord_cols[0]) & \
        (land[:, 1] < fjord_cols[1])

    accepted = []  # type: List[Tuple[int, int]]

    def fill(candidates: np.ndarray, quota: int) -> None:
        for r, c in candidates[rng.permutation(len(candidates))]:
            if len(accepted) >= quota:
                return
            if all(max(abs(r - r0), abs(c - c0)) >= 2 for r0, c0 in accepted):
                accepted.append((int(r), int(c)))

    fill(land[bank], n_parishes // 2)
    fill(land[~bank], n_parishes)
    if len(accepted) < n_parishes:
        raise ValueError(f"Only {len(accepted)} parishes fit on the raster, {n_parishes} requested")
    return accepted


def _region(row: int, col: int, fjord: Tuple[int, int], fjord_cols: Tuple[int, int]) -> str:
    if not (fjord[0] - 2 <= row < fjord[1] + 2 and fjord_cols[0] <= col < fjord_cols[1]):
        return 'reference'
    third = (fjord_cols[1] - fjord_cols[0]) / 3
    if col < fjord_cols[0] + third:
        return 'west'
    if col < fjord_cols[0] + 2 * third:
        return 'middle'
    return 'east'


def _census_records(parishes: List[ParishSite],
                    counties: Mapping[str, str],
                    effects: Mapping[int, float],
                    mean_population: float,
                    sigma: float,
                    rng: np.random.Generator) -> pd.DataFrame:
    """
    Individual records with ``log N_it = a_i + b_t + effect_t * west_i + noise``.
    """
    years = np.array(CENSUS_YEARS)
    n_parishes = len(parishes)
    treated = np.array([p.region == 'west' for p in parishes])
    parish_fe = rng.normal(np.log(mean_population), .3, n_parishes)
    year_fe = np.cumsum(rng.normal(.05, .03, len(years)))
    effect = np.array([effects.get(int(y), 0.) for y in years])
    log_n = parish_fe[:, None] + year_fe[None, :] + effect[None, :] * treated[:, None] + \
        sigma * rng.standard_normal((n_parishes, len(years)))
    sizes = np.maximum(1, np.rint(np.exp(log_n))).astype(int).ravel()

    parish_ids = np.repeat(np.repeat([p.id for p in parishes], len(years)), sizes)
    n_persons = len(parish_ids)
    county_names = sorted(set(counties.values()))
    home = pd.Series(parish_ids).map(counties).to_numpy()
    migrant = rng.random(n_persons) < .15
    other = np.array(county_names, dtype=object)[rng.integers(0, len(county_names), n_persons)]
    weights = np.array(HISCO_WEIGHTS) / np.sum(HISCO_WEIGHTS)
    return pd.DataFrame({'person_id': [f'i{k:07d}' for k in range(n_persons)],
                         'parish_id': parish_ids,
                         'year': np.repeat(np.tile(years, n_parishes), sizes),
                         'age': rng.integers(0, 86, n_persons),
                         'sex': rng.choice(['female', 'male'], n_persons),
                         'birth_county': np.where(migrant, other, home),
                         'hisco': rng.choice(np.array(HISCO_CODES), n_persons, p=weights)})


def _findings(parishes: List[ParishSite],
              half_size: float,
              findings_per_parish: float,
              decline: float,
              decline_year: int,
              rng: np.random.Generator) -> pd.DataFrame:
    """
    Findings whose true dates are uniform over the period, thinned by `decline` in west parishes from
    `decline_year` on, and dated to an interval around the true date.
    """
    rows = []
    for parish in parishes:
        dates = rng.integers(PERIOD[0], PERIOD[1] + 1, rng.poisson(findings_per_parish))
        if parish.region == 'west':
            dates = dates[(dates < decline_year) | (rng.random(len(dates)) >= decline)]
        for t in dates:
            kind = 'coin' if rng.random() < .6 else 'building'
            width = int(rng.integers(0, 31)) if kind == 'coin' else int(rng.integers(50, 201))
            y_min = int(t) - int(rng.integers(0, width + 1))
            y_min = max(PERIOD[0], min(y_min, PERIOD[1] - width))
            x, y = np.asarray(parish.centroid) + rng.uniform(-.8 * half_size, .8 * half_size, 2)
            rows.append({'parish_id': parish.id, 'lon': x, 'lat': y, 'kind': kind, 'year_min': y_min,
                         'year_max': y_min + width})
    frame = pd.DataFrame(rows, columns=['parish_id', 'lon', 'lat', 'kind', 'year_min', 'year_max'])
    frame.insert(0, 'finding_id', [f'f{k:05d}' for k in range(len(frame))])
    return frame


def _soil(parishes: List[ParishSite], rng: np.random.Generator) -> pd.DataFrame:
    n = len(parishes)
    treated = np.array([p.region == 'west' for p in parishes], dtype=int)
    shares = np.column_stack([rng.uniform(0, .35, n) + .25 * treated,
                              rng.uniform(0, .3, n),
                              rng.uniform(0, .3, n),
                              rng.uniform(0, .1, n) * (rng.random(n) < .5),
                              .05 * (rng.random(n) < .05)])
    totals = shares.sum(axis=1, keepdims=True)
    shares = np.where(totals > .95, shares * .95 / totals, shares)
    frame = pd.DataFrame(shares, columns=list(SOIL_TYPES))
    frame.insert(0, 'treated', treated)
    frame.insert(0, 'parish_id', [p.id for p in parishes])
    return frame


def _sound_toll(n_ports: int,
                effects: Mapping[str, float],
                rng: np.random.Generator) -> Tuple[pd.DataFrame, Dict[str, str]]:
    years = np.arange(TRADE_YEARS[0], TRADE_YEARS[1] + 1)
    locations = {f't{k:02d}': LOCATIONS[k % len(LOCATIONS)] for k in range(n_ports)}
    rows = []
    for port, location in locations.items():
        rate = np.exp(rng.normal(np.log(20.), .5)) * np.exp(effects.get(location, 0.) * (years >= POST_YEAR))
        passages = rng.poisson(rate)
        rows.append(pd.DataFrame({'port_id': port, 'year': years, 'passages': passages}))
    records = pd.concat(rows, ignore_index=True)
    return records.loc[records['passages'] > 0].reset_index(drop=True), locations


def generate_synthetic_world(seed: int = 42,
                             nrows: int = 40,
                             ncols: int = 60,
                             cell_km: float = 2.,
                             channel_col: int = 4,
                             channel_width: int = 4,
                             n_parishes: int = 60,
                             mean_population: float = 100.,
                             event_effects: Optional[Mapping[int, float]] = None,
                             sigma: float = 0.05,
                             findings_per_parish: float = 8.,
                             activity_decline: float = 0.5,
                             decline_year: int = 1200,
                             n_trade_ports: int = 12,
                             trade_effects: Optional[Mapping[str, float]] = None) -> SyntheticWorld:
    """
    Simulate a complete set of inputs.

    The raster has open sea along its western, northern and eastern edges and a fjord running east from a
    land strip (the channel) next to the western sea. With the channel closed the western fjord reaches the
    western sea only over land; opening it raises the market access of the western fjord parishes.

    Parameters
    ----------
    seed
        Seeds every random draw.
    nrows, ncols
        Raster dimensions in cells.
    cell_km
        Cell size in kilometres. Coordinates are planar kilometres with the origin in the south-west corner.
    channel_col, channel_width
        First column and width in cells of the channel strip.
    n_parishes
        Number of parishes; half of them are placed on the fjord banks.
    mean_population
        Typical parish population.
    event_effects
        Effect of being a west fjord parish on log population per census year, relative to 1801.
        Defaults to 0.25 in 1901 and 0 otherwise.
    sigma
        Standard deviation of the log population noise.
    findings_per_parish
        Expected number of findings per parish before the decline.
    activity_decline
        Share of the findings of west fjord parishes removed from `decline_year` on.
    decline_year
        First year of the activity decline.
    n_trade_ports
        Number of ports in the toll records, spread over the trade locations.
    trade_effects
        Effect of the post period on log traffic per trade location. Defaults to 1.0 for the west.

    Returns
    -------
    The synthetic world. ``world.ground_truth`` records the simulation parameters.

    Raises
    ------
    DataError
        If the channel strip does not fit between the western sea and the fjord.
    """
    _check_positive(nrows=nrows, ncols=ncols, cell_km=cell_km, channel_width=channel_width, n_parishes=n_parishes,
                    mean_population=mean_population, findings_per_parish=findings_per_parish,
                    n_trade_ports=n_trade_ports)
    if nrows < 12:
        raise ValueError(f"The raster needs at least 12 rows, got {nrows}")
    if sigma < 0 or not 0 <= activity_decline <= 1:
        raise ValueError('sigma must be nonnegative and activity_decline must lie in [0, 1]')
    effects = dict(DEFAULT_EVENT_EFFECTS if event_effects is None else event_effects)
    if effects.get(REFERENCE_YEAR, 0.) != 0.:
        raise ValueError(f"The effect in the reference year {REFERENCE_YEAR} must be 0")
    unknown = set(effects) - set(CENSUS_YEARS)
    if unknown:
        raise ValueError(f"Effects for years {sorted(unknown)} outside the census years {CENSUS_YEARS}")
    trade = dict(DEFAULT_TRADE_EFFECTS if trade_effects is None else trade_effects)

    rng = np.random.default_rng(seed)
    cells, fjord = _layout(nrows, ncols, channel_col, channel_width)
    channel = (channel_col, channel_col + channel_width)
    fjord_cols = (channel[1], ncols - EAST_SEA_COLS)
    surface = CostSurface(cells=cells, cell_size=cell_km, alpha=10.)

    def centre(row: int, col: int) -> Tuple[float, float]:
        return (col + .5) * cell_km, (nrows - 1 - row + .5) * cell_km

    def cell_box(row0: int, row1: int, col0: int, col1: int) -> Polygon:
        return box(col0 * cell_km, (nrows - row1) * cell_km, col1 * cell_km, (nrows - row0) * cell_km)

    placed = _place_parishes(cells, fjord, fjord_cols, channel, n_parishes, rng)
    parishes = [ParishSite(id=f'p{k:03d}', centroid=centre(r, c), region=_region(r, c, fjord, fjord_cols))
                for k, (r, c) in enumerate(placed)]
    polygons = {p.id: box(p.centroid[0] - cell_km, p.centroid[1] - cell_km, p.centroid[0] + cell_km,
                          p.centroid[1] + cell_km) for p in parishes}
    logger.info('Placed %d parishes, %d in the west', len(parishes), sum(p.region == 'west' for p in parishes))

    south = nrows - 4
    ports = [Port(id='A', location=centre(south, channel_col // 2)),
             Port(id='B', location=centre(south, ncols - EAST_SEA_COLS // 2)),
             Port(id='C', location=centre(1, ncols // 2))]

    xs = np.array([p.centroid[0] for p in parishes])
    quartiles = np.quantile(xs, [.25, .5, .75])
    counties = {p.id: f'county_{int(np.searchsorted(quartiles, x))}' for p, x in zip(parishes, xs)}

    west_x, east_x = channel_col * cell_km, (ncols - EAST_SEA_COLS) * cell_km
    north_y = (nrows - NORTH_SEA_ROWS) * cell_km
    coast = MultiLineString([[(west_x, 0), (west_x, north_y)], [(west_x, north_y), (east_x, north_y)],
                             [(east_x, 0), (east_x, north_y)]])
    limfjord = cell_box(fjord[0], fjord[1], fjord_cols[0], fjord_cols[1])
    reference = [p for p in parishes if p.region == 'reference']
    towns = [reference[i].centroid for i in rng.choice(len(reference), min(4, len(reference)), replace=False)]
    geography = parish_geography(parishes, coast, limfjord, market_towns=towns or None,
                                 copenhagen=ports[1].location, crs='planar')

    world = SyntheticWorld(
        surface=surface,
        channel=cell_box(fjord[0], fjord[1], channel[0], channel[1]),
        parishes=parishes,
        parish_polygons=polygons,
        ports=ports,
        counties=counties,
        coast=coast,
        limfjord=limfjord,
        market_towns=towns,
        geography=geography,
        census=_census_records(parishes, counties, effects, mean_population, sigma, rng),
        findings=_findings(parishes, cell_km, findings_per_parish, activity_decline, decline_year, rng),
        soil=_soil(parishes, rng))
    world.sound_toll, world.port_locations = _sound_toll(n_trade_ports, trade, rng)
    world.ground_truth = {'seed': seed,
                          'reference_year': REFERENCE_YEAR,
                          'event_effects': {str(y): float(effects.get(y, 0.)) for y in CENSUS_YEARS},
                          'sigma': sigma,
                          'activity_decline': activity_decline,
                          'decline_year': decline_year,
                          'trade_effects': {loc: float(trade.get(loc, 0.)) for loc in LOCATIONS},
                          'treated_parishes': sorted(p.id for p in parishes if p.region == 'west'),
                          'channel_columns': list(channel),
                          'cell_km': cell_km}
    return world


def _write_csv(frame: pd.DataFrame, path: Path, header: Optional[str]) -> None:
    with open(path, 'w') as f:
        if header:
            f.write(header.rstrip('\n') + '\n')
        frame.to_csv(f, index=False)


def _write_geojson(geometries: Mapping[str, Polygon], path: Path) -> None:
    features = [{'type': 'Feature', 'properties': {'id': key}, 'geometry': mapping(geom)}
                for key, geom in geometries.items()]
    with open(path, 'w') as f:
        json.dump({'type': 'FeatureCollection', 'features': features}, f)


def write_synthetic_world(world: SyntheticWorld,
                          directory: Union[str, os.PathLike],
                          header: Optional[str] = None) -> Dict[str, Path]:
    """
    Write a synthetic world in the input formats read by the command line.

    Parameters
    ----------
    world
        Output of :py:func:`generate_synthetic_world`.
    directory
        Output directory, created if needed.
    header
        Comment line written at the top of every CSV file.

    Returns
    -------
    Path of every written input keyed by its configuration name.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {name: directory / filename for name, filename in [
        ('raster', 'raster.asc'), ('channel', 'channel.geojson'), ('parishes', 'parishes.csv'),
        ('parish_polygons', 'parish_polygons.geojson'), ('ports', 'ports.csv'), ('census', 'census.csv'),
        ('counties', 'counties.csv'), ('sound_toll', 'sound_toll.csv'), ('port_locations', 'port_locations.csv'),
        ('findings', 'findings.csv'), ('soil', 'soil.csv'), ('geography', 'geography.csv'),
        ('ground_truth', 'ground_truth.json')]}

    surface = world.surface
    write_ascii_grid(AsciiGrid(values=surface.cells.astype(float), xllcorner=0., yllcorner=0.,
                               cellsize=surface.cell_size), paths['raster'])
    _write_geojson({'channel': world.channel}, paths['channel'])
    _write_geojson(world.parish_polygons, paths['parish_polygons'])
    _write_csv(pd.DataFrame({'id': [p.id for p in world.parishes],
                             'x': [p.centroid[0] for p in world.parishes],
                             'y': [p.centroid[1] for p in world.parishes],
                             'region': [p.region for p in world.parishes]}), paths['parishes'], header)
    _write_csv(pd.DataFrame({'id': [p.id for p in world.ports],
                             'x': [p.location[0] for p in world.ports],
                             'y': [p.location[1] for p in world.ports],
                             'in_baseline': [int(p.in_baseline) for p in world.ports],
                             'in_counterfactual': [int(p.in_counterfactual) for p in world.ports]}),
               paths['ports'], header)
    _write_csv(world.census, paths['census'], header)
    _write_csv(pd.DataFrame({'parish_id': list(world.counties), 'county': list(world.counties.values())}),
               paths['counties'], header)
    _write_csv(world.sound_toll, paths['sound_toll'], header)
    _write_csv(pd.DataFrame({'port_id': list(world.port_locations), 'location': list(world.port_locations.values())}),
               paths['port_locations'], header)
    _write_csv(world.findings.drop(columns='parish_id'), paths['findings'], header)
    _write_csv(world.soil, paths['soil'], header)
    _write_csv(world.geography, paths['geography'], header)
    with open(paths['ground_truth'], 'w') as f:
        json.dump(world.ground_truth, f, indent=2, sort_keys=True)
    logger.info('Wrote synthetic world to %s', directory)
    return paths

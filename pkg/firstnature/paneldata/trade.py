"""
Port x year panel of ship passages built from toll records.
"""
import logging
import os
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from firstnature.exceptions import DataError

logger = logging.getLogger(__name__)

TRADE_YEARS = (1750, 1855)
POST_YEAR = 1834
"""
First year after the opening of the western channel.
"""

EXCLUSION_WINDOWS = ((1807, 1814), (1825, 1833))
"""
War years and the years during which the channel was opened gradually.
"""

LOCATIONS = ('west', 'middle', 'east', 'other')


def trade_location_classes(port_regions: Mapping[str, Optional[str]]) -> Dict[str, str]:
    """
    Trade location per port: Limfjord regions are kept, every other port is 'other'.
    """
    return {str(port): region if region in LOCATIONS else 'other' for port, region in port_regions.items()}


def build_trade_panel(sound_toll: pd.DataFrame,
                      port_locations: Mapping[str, str],
                      years: Tuple[int, int] = TRADE_YEARS,
                      exclude_windows: Optional[Iterable[Tuple[int, int]]] = None,
                      post_year: int = POST_YEAR) -> pd.DataFrame:
    """
    Yearly traffic per port on a complete port x year grid; years without passages have traffic 0.

    Parameters
    ----------
    sound_toll
        Passage records with columns `port_id, year, passages`.
    port_locations
        Trade location ('west', 'middle', 'east' or 'other') per port. Ports appearing in the records
        without a location are assigned 'other'.
    years
        First and last year of the panel, inclusive.
    exclude_windows
        Inclusive year ranges removed from the panel, e.g. :py:data:`EXCLUSION_WINDOWS`.
    post_year
        First year with `post = 1`.

    Returns
    -------
    Panel with columns `port_id, year, traffic, location, post`, sorted by port and year.
    """
    missing = {'port_id', 'year', 'passages'} - set(sound_toll.columns)
    if missing:
        raise DataError(f"Toll records are missing columns {sorted(missing)}")
    first, last = years
    if first > last:
        raise ValueError(f"Empty year range {years}")
    records = sound_toll.assign(port_id=sound_toll['port_id'].astype(str))
    if records['passages'].isna().any() or (records['passages'] < 0).any():
        raise DataError('Passage counts must be nonnegative')

    outside = ~records['year'].between(first, last)
    if outside.any():
        logger.warning('Dropping %d toll records outside %d-%d', int(outside.sum()), first, last)
        records = records.loc[~outside]

    locations = {str(k): v for k, v in port_locations.items()}
    invalid = {v for v in locations.values() if v not in LOCATIONS}
    if invalid:
        raise DataError(f"Unknown trade locations {sorted(invalid)}. Accepted values are {LOCATIONS}")
    unmapped = sorted(set(records['port_id']) - set(locations))
    if unmapped:
        logger.warning('%d ports without a location are assigned to "other": %s', len(unmapped), unmapped[:10])
        locations.update({port: 'other' for port in unmapped})

    traffic = records.groupby(['port_id', 'year'])['passages'].sum()
    ports = sorted(locations)
    index = pd.MultiIndex.from_product([ports, np.arange(first, last + 1)], names=['port_id', 'year'])
    panel = traffic.reindex(index, fill_value=0).rename('traffic').reset_index()
    panel['location'] = panel['port_id'].map(locations)
    panel['post'] = (panel['year'] >= post_year).astype(int)

    for lo, hi in exclude_windows or ():
        panel = panel.loc[~panel['year'].between(lo, hi)]
    logger.info('Trade panel: %d ports x %d years', len(ports), panel['year'].nunique())
    return panel.reset_index(drop=True)


def load_sound_toll(path: Union[str, os.PathLike]) -> pd.DataFrame:
    """
    Read toll records with columns `port_id, year, passages`.
    """
    return pd.read_csv(path, comment='#', dtype={'port_id': str})


def load_port_locations(path: Union[str, os.PathLike], column: str = 'location') -> Dict[str, str]:
    """
    Read a `port_id, location` table. Missing locations become 'other'.
    """
    frame = pd.read_csv(path, comment='#', dtype=str)
    id_column = 'port_id' if 'port_id' in frame.columns else 'id'
    if id_column not in frame.columns or column not in frame.columns:
        raise DataError(f"{path} must contain port_id and {column} columns")
    return trade_location_classes(dict(zip(frame[id_column], frame[column].where(frame[column].notna(), None))))


def location_dummies(panel: pd.DataFrame, locations: Sequence[str] = ('west', 'middle', 'east')) -> pd.DataFrame:
    """
    Post x Location interaction columns named e.g. `post_x_west`.
    """
    out = pd.DataFrame(index=panel.index)
    for location in locations:
        out[f'post_x_{location}'] = panel['post'] * (panel['location'] == location).astype(int)
    return out

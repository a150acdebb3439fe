"""
Aggregation of individual census records into a balanced parish x year panel.
"""
import logging
import os
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from firstnature.exceptions import DataError

logger = logging.getLogger(__name__)

CENSUS_YEARS = (1787, 1801, 1834, 1840, 1845, 1850, 1860, 1880, 1901)

MIGRATION_FIRST_YEAR = 1845
"""
First census recording the county of birth.
"""

HISCO_GROUPS = {'0': '0_1', '1': '0_1', '2': '2', '3': '3', '4': '4', '5': '5', '6': '6',
                '7': '7_8_9', '8': '7_8_9', '9': '7_8_9'}
"""
Major HISCO groups keyed by the first digit of the code. Groups 0/1 and 7/8/9 are merged.
"""

GROUP_COLUMNS = [f'occ_{g}' for g in ('0_1', '2', '3', '4', '5', '6', '7_8_9')]

DETAILED_DIGITS = {'6': 3, '7': 2, '8': 2, '9': 2}
"""
Number of leading code digits used for the detailed occupation counts, per first digit.
"""

CENSUS_COLUMNS = ['person_id', 'parish_id', 'year', 'age', 'sex', 'birth_county', 'hisco']

SEXES = ('female', 'male', 'unknown')

UNKNOWN = ('', 'unknown', 'nan', 'none')

CHILD_AGES = (1, 5)
MOTHER_AGES = (15, 45)


def age_bin_labels(width: int = 10, last: int = 80) -> List[str]:
    """
    Column names of the age-group shares, e.g. 'age_00_09', ..., 'age_80_plus'.
    """
    if width < 1 or last % width:
        raise ValueError(f"Age bins of width {width} must tile [0, {last})")
    labels = [f'age_{lo:02d}_{lo + width - 1:02d}' for lo in range(0, last, width)]
    return labels + [f'age_{last:02d}_plus']


def hisco_group(code: Optional[str]) -> Optional[str]:
    """
    Major group label of a HISCO code, `None` when the code is missing.
    """
    if code is None or str(code).strip().lower() in UNKNOWN:
        return None
    code = str(code).strip()
    if not code[0].isdigit():
        raise DataError(f"Invalid HISCO code '{code}'")
    return HISCO_GROUPS[code[0]]


def _normalise_codes(series: pd.Series) -> pd.Series:
    codes = series.astype(object).where(series.notna(), '').astype(str).str.strip()
    codes = codes.where(~codes.str.lower().isin(UNKNOWN), '')
    # codes read as numbers lose their leading zeros and gain a decimal part
    codes = codes.str.replace(r'\.0$', '', regex=True)
    numeric = codes.str.fullmatch(r'\d{1,4}')
    codes = codes.where(~numeric, codes.str.zfill(5))
    bad = (codes != '') & ~codes.str[:1].str.isdigit()
    if bad.any():
        raise DataError(f"Invalid HISCO codes {sorted(codes[bad].unique())[:5]}")
    return codes


def _count_chunk(chunk: pd.DataFrame,
                 counties: Optional[Mapping[str, str]],
                 age_width: int,
                 age_last: int,
                 detailed_digits: Mapping[str, int]) -> pd.DataFrame:
    missing = set(CENSUS_COLUMNS[1:]) - set(chunk.columns)
    if missing:
        raise DataError(f"Census records are missing columns {sorted(missing)}")
    if chunk['age'].isna().any():
        raise DataError(f"Missing ages for persons {list(chunk.loc[chunk['age'].isna(), 'person_id'])[:5]}")
    if (chunk['age'] < 0).any():
        raise DataError(f"Negative ages for persons {list(chunk.loc[chunk['age'] < 0, 'person_id'])[:5]}")

    age = chunk['age'].to_numpy(dtype=float)
    sex = chunk['sex'].astype(str).str.lower()
    codes = _normalise_codes(chunk['hisco'])
    counts = pd.DataFrame({'parish_id': chunk['parish_id'].astype(str).to_numpy(),
                           'year': chunk['year'].astype(int).to_numpy(),
                           'population': 1})

    first = codes.str[:1]
    for group in GROUP_COLUMNS:
        digits = group[len('occ_'):].split('_')
        counts[group] = first.isin(digits).to_numpy().astype(int)
    for digit, n_digits in detailed_digits.items():
        selected = (first == digit).to_numpy()
        if selected.any():
            dummies = pd.get_dummies(codes[selected].str[:n_digits].to_numpy(), prefix='occ', prefix_sep='_')
            detail = pd.DataFrame(0, index=np.arange(len(chunk)), columns=dummies.columns)
            detail.loc[np.flatnonzero(selected)] = dummies.to_numpy(dtype=int)
            counts = pd.concat([counts, detail], axis=1)

    counts['children_1_5'] = ((age >= CHILD_AGES[0]) & (age <= CHILD_AGES[1])).astype(int)
    counts['women_15_45'] = ((sex == 'female').to_numpy() & (age >= MOTHER_AGES[0]) &
                             (age <= MOTHER_AGES[1])).astype(int)

    bins = np.minimum(age // age_width, age_last // age_width).astype(int)
    for i, label in enumerate(age_bin_labels(age_width, age_last)):
        counts[label] = (bins == i).astype(int)

    if counties is not None:
        birth = chunk['birth_county'].astype(object).where(chunk['birth_county'].notna(), '').astype(str)
        unknown = birth.str.strip().str.lower().isin(UNKNOWN).to_numpy()
        home = chunk['parish_id'].astype(str).map(counties)
        if home.isna().any():
            missing_ids = sorted(chunk.loc[home.isna(), 'parish_id'].astype(str).unique())
            raise DataError(f"No county for parishes {missing_ids[:5]}")
        counts['born_other_county'] = (~unknown & (birth.str.strip() != home).to_numpy()).astype(int)
        counts['birth_county_unknown'] = unknown.astype(int)
    return counts.groupby(['parish_id', 'year'], sort=False).sum()


def aggregate_census(records: Union[pd.DataFrame, Iterable[pd.DataFrame]],
                     parishes: Optional[Iterable[str]] = None,
                     counties: Optional[Mapping[str, str]] = None,
                     years: Sequence[int] = CENSUS_YEARS,
                     age_width: int = 10,
                     age_last: int = 80,
                     detailed_digits: Optional[Mapping[str, int]] = None) -> pd.DataFrame:
    """
    Aggregate individual census records into a balanced parish x year panel.

    Parameters
    ----------
    records
        Census records (`person_id, parish_id, year, age, sex, birth_county, hisco`) as one frame or as an
        iterable of chunks. Chunks are counted independently and summed, so the result does not depend on
        the order or the split of the records.
    parishes
        Parish registry. Records of parishes outside the registry are dropped. If `None`, every parish
        in the records is used.
    counties
        Parish to county lookup used for the migration outcome. If `None`, no migration columns are filled.
    years
        Census years of the panel. Records from other years are dropped.
    age_width, age_last
        Width of the age bins and the lower bound of the open-ended last bin.
    detailed_digits
        Number of leading digits per first HISCO digit for the detailed occupation counts.

    Returns
    -------
    Panel with one row per parish and census year, sorted by parish and year. Parishes not observed in
    every census year are dropped; their ids are stored in ``panel.attrs['dropped_parishes']``.
    """
    years = sorted(int(y) for y in years)
    if not years:
        raise ValueError('At least one census year is required')
    digits = DETAILED_DIGITS if detailed_digits is None else detailed_digits
    chunks = [records] if isinstance(records, pd.DataFrame) else records

    partial = [_count_chunk(chunk, counties, age_width, age_last, digits) for chunk in chunks if len(chunk)]
    if not partial:
        raise DataError('No census records')
    counts = pd.concat(partial).fillna(0).groupby(level=['parish_id', 'year']).sum().astype(int)
    counts = counts.reset_index()

    off_years = ~counts['year'].isin(years)
    if off_years.any():
        logger.warning('Dropping %d persons recorded outside the census years %s',
                       int(counts.loc[off_years, 'population'].sum()), years)
        counts = counts.loc[~off_years]

    if parishes is not None:
        registry = {str(p) for p in parishes}
        unknown = ~counts['parish_id'].isin(registry)
        if unknown.any():
            logger.warning('Dropping records of %d parishes missing from the registry: %s',
                           counts.loc[unknown, 'parish_id'].nunique(),
                           sorted(counts.loc[unknown, 'parish_id'].unique())[:10])
            counts = counts.loc[~unknown]
    else:
        registry = set(counts['parish_id'])

    n_years = counts.groupby('parish_id')['year'].nunique()
    complete = set(n_years.index[n_years == len(years)])
    dropped = sorted(registry - complete)
    if dropped:
        logger.warning('Dropping %d parishes not observed in all %d census years: %s', len(dropped), len(years),
                       dropped[:10])
    panel = counts.loc[counts['parish_id'].isin(complete)].sort_values(['parish_id', 'year'])
    panel = _derive_outcomes(panel.reset_index(drop=True), counties is not None, age_width, age_last)
    panel.attrs['dropped_parishes'] = dropped
    logger.info('Census panel: %d parishes x %d years', len(complete), len(years))
    return panel


def _derive_outcomes(panel: pd.DataFrame, with_migration: bool, age_width: int, age_last: int) -> pd.DataFrame:
    women = panel['women_15_45'].to_numpy(dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        panel['child_women_ratio'] = np.where(women > 0, panel['children_1_5'] / women, np.nan)
    n_missing = int((women == 0).sum())
    if n_missing:
        logger.warning('%d parish-years have no women aged %d-%d; child-women ratio set to missing',
                       n_missing, *MOTHER_AGES)

    population = panel['population'].to_numpy(dtype=float)
    for label in age_bin_labels(age_width, age_last):
        panel[label] = panel[label] / population

    if with_migration:
        observed = panel['year'] >= MIGRATION_FIRST_YEAR
        panel['born_other_county'] = panel['born_other_county'].where(observed)
        panel['migrant_share'] = (panel['born_other_county'] / population).where(observed)
        n_unknown = int(panel.loc[observed, 'birth_county_unknown'].sum())
        if n_unknown:
            logger.warning('%d persons with unknown county of birth counted as non-migrants', n_unknown)
        panel = panel.drop(columns='birth_county_unknown')
    else:
        panel['born_other_county'] = np.nan
        panel['migrant_share'] = np.nan

    base = ['parish_id', 'year', 'population'] + GROUP_COLUMNS
    detailed = sorted(c for c in panel.columns if c.startswith('occ_') and c not in GROUP_COLUMNS)
    rest = ['children_1_5', 'women_15_45', 'child_women_ratio', 'born_other_county', 'migrant_share']
    ages = age_bin_labels(age_width, age_last)
    return panel[base + detailed + rest + ages]


def occupation_columns(panel: pd.DataFrame, detailed: bool = False) -> List[str]:
    """
    Occupation count columns of a census panel: the major groups, or the detailed codes.
    """
    if not detailed:
        return [c for c in GROUP_COLUMNS if c in panel.columns]
    return [c for c in panel.columns if c.startswith('occ_') and c not in GROUP_COLUMNS]


def attach_treatment(panel: pd.DataFrame,
                     regions: Mapping[str, Optional[str]],
                     market_access: Optional[pd.DataFrame] = None) -> pd.DataFrame:
    """
    Add `region`, `treatment_dummy` (west = 1) and `delta_log_ma` columns to a panel.

    Parameters
    ----------
    panel
        Parish x year panel.
    regions
        Region per parish id.
    market_access
        Market access records with `parish_id` and `delta_log_ma`. Parishes without a record get a
        missing treatment intensity.
    """
    out = panel.copy()
    out['region'] = out['parish_id'].map(lambda p: regions.get(str(p)))
    n_missing = int(out['region'].isna().sum())
    if n_missing:
        logger.warning('%d panel rows belong to parishes without a region', n_missing)
    out['treatment_dummy'] = (out['region'] == 'west').astype(int)
    if market_access is not None:
        delta = market_access.set_index(market_access['parish_id'].astype(str))['delta_log_ma']
        out['delta_log_ma'] = out['parish_id'].astype(str).map(delta)
        n_no_ma = out.loc[out['delta_log_ma'].isna(), 'parish_id'].nunique()
        if n_no_ma:
            logger.warning('%d parishes have no market access record', n_no_ma)
    else:
        out['delta_log_ma'] = np.nan
    return out


def load_census(path: Union[str, os.PathLike], chunksize: Optional[int] = None) -> \
        Union[pd.DataFrame, Iterable[pd.DataFrame]]:
    """
    Read census records. With `chunksize` the records are returned as an iterator of chunks.
    """
    dtypes = {'person_id': str, 'parish_id': str, 'sex': str, 'birth_county': str, 'hisco': str}
    return pd.read_csv(path, comment='#', dtype=dtypes, chunksize=chunksize, keep_default_na=True)


def load_counties(path: Union[str, os.PathLike]) -> Dict[str, str]:
    """
    Read a `parish_id, county` lookup table.
    """
    frame = pd.read_csv(path, comment='#', dtype=str)
    if not {'parish_id', 'county'} <= set(frame.columns):
        raise DataError(f"{path} must contain parish_id and county columns")
    if frame['parish_id'].duplicated().any():
        raise DataError(f"{path} assigns some parishes to several counties")
    return dict(zip(frame['parish_id'], frame['county']))

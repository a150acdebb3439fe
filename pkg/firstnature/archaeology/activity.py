"""
Parish x year panels of archaeological activity. The outcome is the probability that any finding of a parish was
generated within a window around a grid year. It is estimated by Monte Carlo: every replicate draws a generation
year for each finding from its dating distribution and marks the grid years whose window contains a draw.
The replicates are kept so that inference can resample them.
"""
import logging
import os
from typing import Dict, List, Optional, Sequence, Union

import attr
import numpy as np
import pandas as pd
import shapely
from shapely.geometry.base import BaseGeometry

from firstnature.archaeology.dating import (FINDING_KINDS, PERIOD, FindingRecord, dating_distribution,
                                            window_probability)
from firstnature.exceptions import DataError
from firstnature.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

WINDOW_HALFWIDTH = 25

REFERENCE_YEAR = 1000

FINDING_COLUMNS = ['finding_id', 'lon', 'lat', 'kind', 'year_min', 'year_max']

KIND_ALIASES = {'coin': 'coin', 'coins': 'coin', 'building': 'building', 'buildings': 'building'}


def year_grid(start: int = PERIOD[0], stop: int = PERIOD[1], step: int = 50) -> np.ndarray:
    """
    Grid years ``start, start + step, ..., stop``.
    """
    if step < 1 or stop < start:
        raise ValueError(f"Invalid year grid {start}-{stop} in steps of {step}")
    return np.arange(start, stop + 1, step)


def _check_prior(instance, attribute, value):
    if not 0. < value <= 1.:
        raise ValueError(f"prior_c must lie in (0, 1], got {value}")


@attr.s(frozen=True, eq=False)
class ActivityPanel:
    """
    Monte Carlo activity panel.

    Parameters
    ----------
    parish_ids
        Row labels.
    years
        Grid years.
    replicates
        Boolean array of shape `(B, n_parishes, n_years)`; entry `(b, i, t)` is True if a finding of parish `i`
        was drawn within the window of year `t` in replicate `b`.
    window
        Half width of the window in years.
    prior_c
        Prior probability that activity leaves any finding, scaling every probability.
    """
    parish_ids = attr.ib(converter=lambda ids: [str(i) for i in ids])  # type: List[str]
    years = attr.ib(converter=lambda y: np.asarray(y, dtype=int))  # type: np.ndarray
    replicates = attr.ib(converter=lambda r: np.asarray(r, dtype=bool))  # type: np.ndarray
    window = attr.ib(default=WINDOW_HALFWIDTH, converter=int)  # type: int
    prior_c = attr.ib(default=1., converter=float, validator=_check_prior)  # type: float

    def __attrs_post_init__(self):
        expected = (len(self.parish_ids), len(self.years))
        if self.replicates.ndim != 3 or self.replicates.shape[1:] != expected:
            raise ValueError(f"Replicates of shape {self.replicates.shape} do not match {expected} parishes x years")
        if self.replicates.shape[0] < 1:
            raise ValueError('At least one replicate is required')

    @property
    def n_samples(self) -> int:
        return self.replicates.shape[0]

    @property
    def probability(self) -> np.ndarray:
        """
        Success frequency over replicates times `prior_c`, shape `(n_parishes, n_years)`.
        """
        return self.replicates.sum(axis=0) / self.n_samples * self.prior_c

    def resampled_probability(self, replicate_idx: np.ndarray) -> np.ndarray:
        """
        Probability panel averaging the replicates `replicate_idx`, which may repeat.
        """
        weights = np.bincount(replicate_idx, minlength=self.n_samples).astype(float)
        return np.tensordot(weights, self.replicates, axes=1) / len(replicate_idx) * self.prior_c

    def with_prior(self, prior_c: float) -> 'ActivityPanel':
        return attr.evolve(self, prior_c=prior_c)

    def to_frame(self, probability: Optional[np.ndarray] = None, column: str = 'probability') -> pd.DataFrame:
        """
        Long panel with columns `parish_id`, `year` and the probability.
        """
        values = self.probability if probability is None else probability
        return pd.DataFrame({'parish_id': np.repeat(self.parish_ids, len(self.years)),
                             'year': np.tile(self.years, len(self.parish_ids)),
                             column: np.asarray(values, dtype=float).ravel()})


def finding_records(findings: pd.DataFrame, dating_model: str = 'uniform') -> List[FindingRecord]:
    """
    Finding records from a frame with columns `finding_id, parish_id, kind, year_min, year_max`.
    """
    missing = {'finding_id', 'parish_id', 'kind', 'year_min', 'year_max'} - set(findings.columns)
    if missing:
        raise DataError(f"Findings are missing columns {sorted(missing)}")
    try:
        return [FindingRecord(finding_id=f, parish_id=p, kind=k, y_min=lo, y_max=hi, dating_model=dating_model)
                for f, p, k, lo, hi in zip(findings['finding_id'], findings['parish_id'], findings['kind'],
                                           findings['year_min'], findings['year_max'])]
    except ValueError as e:
        raise DataError(str(e)) from e


def _parish_index(findings: Sequence[FindingRecord], parish_ids: Optional[Sequence]) -> Dict[str, int]:
    if parish_ids is None:
        parish_ids = sorted({f.parish_id for f in findings})
    index = {str(p): i for i, p in enumerate(parish_ids)}
    unknown = {f.parish_id for f in findings} - set(index)
    if unknown:
        raise DataError(f"Findings refer to parishes outside the panel: {sorted(unknown)[:5]}")
    return index


class _Sampler:
    """
    Draws one generation year per finding by inverting the stacked dating distributions.
    """

    def __init__(self, findings: Sequence[FindingRecord]):
        supports, cdfs, self.last = [], [], []
        offset = 0
        for k, finding in enumerate(findings):
            years, probabilities = dating_distribution(finding)
            cdf = np.cumsum(probabilities)
            cdf[-1] = 1.
            supports.append(years)
            # shifting by k keeps the stacked cdf increasing
            cdfs.append(cdf + k)
            offset += len(years)
            self.last.append(offset - 1)
        self.n = len(findings)
        self.years = np.concatenate(supports) if supports else np.empty(0, dtype=int)
        self.cdf = np.concatenate(cdfs) if cdfs else np.empty(0)
        self.last = np.asarray(self.last, dtype=int)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(self.n)
        idx = np.searchsorted(self.cdf, np.arange(self.n) + u, side='right')
        return self.years[np.minimum(idx, self.last)]


def monte_carlo_panel(findings: Sequence[FindingRecord],
                      parish_ids: Optional[Sequence] = None,
                      years: Optional[Sequence[int]] = None,
                      window: int = WINDOW_HALFWIDTH,
                      n_samples: int = 1000,
                      seed: int = 0,
                      prior_c: float = 1.,
                      n_jobs: Optional[int] = 1,
                      progress: bool = False) -> ActivityPanel:
    """
    Monte Carlo activity panel.

    Parameters
    ----------
    findings
        Findings resolved to parishes, all of one kind.
    parish_ids
        Panel rows. Parishes without findings have zero probability everywhere. Defaults to the parishes of
        `findings`.
    years
        Grid years, defaults to 750, 800, ..., 1500.
    window
        Half width of the window around every grid year.
    n_samples
        Number of Monte Carlo replicates.
    seed
        Seed; replicate `b` uses the `b`-th spawned substream so results do not depend on `n_jobs`.
    prior_c
        Prior probability of any finding.
    n_jobs
        Number of threads drawing replicates.
    progress
        Whether to display a progress bar.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be at least 1, got {n_samples}")
    if window < 0:
        raise ValueError(f"window must be non-negative, got {window}")
    grid = year_grid() if years is None else np.asarray(years, dtype=int)
    index = _parish_index(findings, parish_ids)
    parish_idx = np.array([index[f.parish_id] for f in findings], dtype=int)
    sampler = _Sampler(findings)
    lower, upper = grid - window, grid + window
    shape = (len(index), len(grid))

    def replicate(seed_seq: np.random.SeedSequence) -> np.ndarray:
        out = np.zeros(shape, dtype=bool)
        if not sampler.n:
            return out
        drawn = sampler.draw(np.random.default_rng(seed_seq))
        hits = (drawn[:, None] >= lower) & (drawn[:, None] < upper)
        counts = np.zeros(shape, dtype=int)
        np.add.at(counts, parish_idx, hits)
        return counts > 0

    logger.info('Drawing %d replicates for %d findings in %d parishes', n_samples, len(findings), len(index))
    substreams = np.random.SeedSequence(seed).spawn(n_samples)
    replicates = parallel_map(replicate, substreams, n_jobs=n_jobs, chunksize=max(1, n_samples // 64),
                              progress=progress, desc='Monte Carlo replicates')
    return ActivityPanel(parish_ids=list(index), years=grid, replicates=np.stack(replicates), window=window,
                         prior_c=prior_c)


def exact_activity_probability(findings: Sequence[FindingRecord],
                               parish_ids: Optional[Sequence] = None,
                               years: Optional[Sequence[int]] = None,
                               window: int = WINDOW_HALFWIDTH,
                               prior_c: float = 1.) -> pd.DataFrame:
    """
    Probability that any finding of a parish was generated within the window of every grid year,
    ``prior_c * (1 - prod_c (1 - P(t_c in window)))``, which the Monte Carlo panel estimates.

    Returns
    -------
    Frame indexed by parish id with one column per grid year.
    """
    grid = year_grid() if years is None else np.asarray(years, dtype=int)
    index = _parish_index(findings, parish_ids)
    none = np.ones((len(index), len(grid)))
    for finding in findings:
        none[index[finding.parish_id]] *= 1. - window_probability(finding, grid, window)
    return pd.DataFrame(prior_c * (1. - none), index=list(index), columns=grid)


def load_findings(path: Union[str, os.PathLike]) -> pd.DataFrame:
    """
    Read a findings registry with columns `finding_id, lon, lat, kind, year_min, year_max`.
    """
    frame = pd.read_csv(path, comment='#', dtype={'finding_id': str, 'kind': str})
    missing = set(FINDING_COLUMNS) - set(frame.columns)
    if missing:
        raise DataError(f"{path} is missing columns {sorted(missing)}")
    frame = frame[FINDING_COLUMNS].copy()
    if frame[['lon', 'lat', 'year_min', 'year_max']].isna().any().any():
        raise DataError(f"{path} contains findings without coordinates or dating")
    frame['kind'] = frame['kind'].str.strip().str.lower()
    return frame


def resolve_parishes(findings: pd.DataFrame,
                     parish_polygons: Dict[str, BaseGeometry],
                     kinds: Sequence[str] = FINDING_KINDS,
                     period: Sequence[int] = PERIOD) -> pd.DataFrame:
    """
    Attach the parish containing every finding and keep the analysed findings. Findings outside all parishes,
    of other kinds or dated outside `period` are dropped and logged.

    Parameters
    ----------
    findings
        Output of :py:func:`load_findings`.
    parish_polygons
        Parish id -> polygon, in the coordinates of the findings.
    kinds
        Finding kinds to keep.
    period
        Inclusive first and last year a dating interval may cover.

    Returns
    -------
    Findings with a `parish_id` column, kinds normalised to `'coin'` and `'building'`.
    """
    frame = findings.copy()
    frame['kind'] = frame['kind'].map(lambda k: KIND_ALIASES.get(str(k).strip().lower()))
    n_total = len(frame)

    keep = frame['kind'].isin(kinds).to_numpy()
    if (~keep).any():
        logger.info('Dropping %d of %d findings of other kinds', int((~keep).sum()), n_total)
    in_period = ((frame['year_min'] >= period[0]) & (frame['year_max'] <= period[1])
                 & (frame['year_min'] <= frame['year_max'])).to_numpy()
    if (keep & ~in_period).any():
        logger.info('Dropping %d findings dated outside %d-%d', int((keep & ~in_period).sum()), *period)
    keep &= in_period

    ids = sorted(parish_polygons)
    tree = shapely.STRtree([parish_polygons[i] for i in ids])
    points = shapely.points(frame['lon'].to_numpy(dtype=float), frame['lat'].to_numpy(dtype=float))
    point_idx, polygon_idx = tree.query(points, predicate='intersects')
    parish = np.full(len(frame), -1)
    # points on a shared border go to the first parish in id order
    for p, g in sorted(zip(point_idx, polygon_idx), reverse=True):
        parish[p] = g
    outside = keep & (parish < 0)
    if outside.any():
        logger.warning('Dropping %d findings outside all parish polygons', int(outside.sum()))
    keep &= parish >= 0

    frame['parish_id'] = [ids[g] if g >= 0 else None for g in parish]
    frame = frame.loc[keep].reset_index(drop=True)
    frame[['year_min', 'year_max']] = frame[['year_min', 'year_max']].astype(int)
    logger.info('Resolved %d of %d findings to %d parishes', len(frame), n_total, frame['parish_id'].nunique())
    return frame

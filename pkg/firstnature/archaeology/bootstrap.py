"""
Event studies on activity panels with clustered bootstrap inference. Every bootstrap draw resamples parishes with
replacement and, within the draw, the Monte Carlo replicates, so the standard errors include the dating
uncertainty.
"""
import copy
import logging
from typing import Callable, Optional

import attr
import numpy as np
import pandas as pd

from firstnature.api.defaults import DEFAULT_DATA_BOOTSTRAP, DEFAULT_META_BOOTSTRAP
from firstnature.api.interfaces import Result
from firstnature.archaeology.activity import REFERENCE_YEAR, ActivityPanel
from firstnature.estimators.event_study import EventStudyFit, EventStudySpec, twfe_event_study
from firstnature.estimators.inference import p_values
from firstnature.exceptions import DataError, NumericalError
from firstnature.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

APPROACHES = ('dummy', 'continuous')

Estimator = Callable[[pd.DataFrame], pd.Series]


class BootstrapResult(Result):
    """
    Point estimates with bootstrap standard errors and percentile confidence intervals. `draws` has one row
    per bootstrap draw and one column per term; failed draws are `nan` rows.
    """

    def _index(self, term: str) -> int:
        terms = list(self.data['terms'])
        if term not in terms:
            raise KeyError(f"Unknown term '{term}'. Terms are {terms}")
        return terms.index(term)

    def coef(self, term: str) -> float:
        return float(np.asarray(self.data['estimate'], dtype=float)[self._index(term)])

    def std_err(self, term: str) -> float:
        return float(np.asarray(self.data['se'], dtype=float)[self._index(term)])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'term': list(self.data['terms']),
                             'estimate': np.asarray(self.data['estimate'], dtype=float),
                             'se': np.asarray(self.data['se'], dtype=float),
                             'ci_lower': np.asarray(self.data['ci_lower'], dtype=float),
                             'ci_upper': np.asarray(self.data['ci_upper'], dtype=float)})


def _check_approach(instance, attribute, value):
    if value not in APPROACHES:
        raise ValueError(f"Unknown approach '{value}'. Accepted values are {APPROACHES}")


@attr.s(frozen=True)
class ArchEventStudy:
    """
    Event study of an activity probability on the treatment of the closing, callable on a long panel with
    columns `unit`, `parish_id`, `year` and `probability`.

    Parameters
    ----------
    treatments
        Parish level frame with `parish_id` and the treatment column.
    approach
        ``'dummy'`` regresses on the affected indicator. ``'continuous'`` regresses on the loss of market
        access, the negated change in log market access from the closing, so that coefficients read as the
        response to a market access loss.
    treatment_column
        Defaults to `'treatment_dummy'` or `'delta_log_ma'`.
    reference_year
        Omitted grid year.
    """
    treatments = attr.ib(eq=False)  # type: pd.DataFrame
    approach = attr.ib(default='dummy', validator=_check_approach)  # type: str
    treatment_column = attr.ib(default=None)  # type: Optional[str]
    reference_year = attr.ib(default=REFERENCE_YEAR, converter=int)  # type: int

    def __attrs_post_init__(self):
        missing = {'parish_id', self.column} - set(self.treatments.columns)
        if missing:
            raise DataError(f"Treatments are missing columns {sorted(missing)}")
        if self.treatments['parish_id'].duplicated().any():
            raise DataError('Treatments contain duplicated parishes')

    @property
    def column(self) -> str:
        if self.treatment_column is not None:
            return self.treatment_column
        return 'treatment_dummy' if self.approach == 'dummy' else 'delta_log_ma'

    @property
    def spec(self) -> EventStudySpec:
        return EventStudySpec(outcome='probability', transform='identity', treatment=self.approach,
                              treatment_column='_treatment', reference_year=self.reference_year, unit='unit')

    @property
    def params(self) -> dict:
        return {'approach': self.approach, 'treatment_column': self.column, 'reference_year': self.reference_year}

    def prepare(self, frame: pd.DataFrame) -> pd.DataFrame:
        treatment = self.treatments.set_index(self.treatments['parish_id'].astype(str))[self.column].astype(float)
        if self.approach == 'continuous':
            treatment = -treatment
        out = frame.copy()
        out['_treatment'] = out['parish_id'].astype(str).map(treatment)
        return out

    def fit(self, frame: pd.DataFrame) -> EventStudyFit:
        fit = twfe_event_study(self.prepare(frame), self.spec)
        meta = copy.deepcopy(fit.meta)
        meta['name'] = 'ArchEventStudy'
        meta['params'].update(self.params)
        return EventStudyFit(meta=meta, data=fit.data)

    def __call__(self, frame: pd.DataFrame) -> pd.Series:
        table = self.fit(frame).to_frame()
        table = table.loc[~table['reference']]
        return pd.Series(table['estimate'].to_numpy(), index=table['term'].to_numpy())


def panel_frame(panel: ActivityPanel,
                parish_idx: Optional[np.ndarray] = None,
                replicate_idx: Optional[np.ndarray] = None) -> pd.DataFrame:
    """
    Long panel of the parishes `parish_idx` (which may repeat) averaging the replicates `replicate_idx`. Every
    resampled parish becomes its own `unit`.
    """
    probability = panel.probability if replicate_idx is None else panel.resampled_probability(replicate_idx)
    if parish_idx is None:
        parish_idx = np.arange(len(panel.parish_ids))
    n_years = len(panel.years)
    return pd.DataFrame({'unit': np.repeat(np.arange(len(parish_idx)), n_years),
                         'parish_id': np.repeat(np.asarray(panel.parish_ids, dtype=object)[parish_idx], n_years),
                         'year': np.tile(panel.years, len(parish_idx)),
                         'probability': probability[parish_idx].ravel()})


def arch_event_study(panel: ActivityPanel,
                     treatments: pd.DataFrame,
                     approach: str = 'dummy',
                     reference_year: int = REFERENCE_YEAR,
                     treatment_column: Optional[str] = None) -> EventStudyFit:
    """
    Two-way fixed effects event study of the activity probability with analytic parish-clustered standard
    errors. See :py:class:`ArchEventStudy`; :py:func:`clustered_bootstrap` gives the bootstrap inference.
    """
    estimator = ArchEventStudy(treatments=treatments, approach=approach, treatment_column=treatment_column,
                               reference_year=reference_year)
    return estimator.fit(panel_frame(panel))


def clustered_bootstrap(panel: ActivityPanel,
                        estimator: Estimator,
                        n_boot: int = 200,
                        seed: int = 0,
                        level: float = 0.05,
                        n_jobs: Optional[int] = 1,
                        progress: bool = False) -> BootstrapResult:
    """
    Clustered bootstrap over parishes and Monte Carlo replicates.

    Parameters
    ----------
    panel
        Activity panel with its replicates.
    estimator
        Maps a long panel (see :py:func:`panel_frame`) to a series of named estimates.
    n_boot
        Number of bootstrap draws.
    seed
        Seed; draw `r` uses the `r`-th spawned substream so results do not depend on `n_jobs`.
    level
        Percentile confidence intervals cover ``1 - level``.
    n_jobs
        Number of threads.
    progress
        Whether to display a progress bar.

    Returns
    -------
    Point estimates on the full panel, the draws, their standard deviations and percentile intervals.
    """
    if n_boot < 2:
        raise ValueError(f"n_boot must be at least 2, got {n_boot}")
    if not 0. < level < 1.:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    estimate = estimator(panel_frame(panel))
    terms = list(estimate.index)
    n_parishes, n_samples = len(panel.parish_ids), panel.n_samples

    def draw(seed_seq: np.random.SeedSequence) -> np.ndarray:
        rng = np.random.default_rng(seed_seq)
        parish_idx = rng.integers(0, n_parishes, size=n_parishes)
        replicate_idx = rng.integers(0, n_samples, size=n_samples)
        try:
            values = estimator(panel_frame(panel, parish_idx, replicate_idx))
        except (NumericalError, DataError) as e:
            logger.debug('Bootstrap draw failed: %s', e)
            return np.full(len(terms), np.nan)
        return values.reindex(terms).to_numpy(dtype=float)

    substreams = np.random.SeedSequence(seed).spawn(n_boot)
    draws = np.vstack(parallel_map(draw, substreams, n_jobs=n_jobs, chunksize=max(1, n_boot // 64),
                                   progress=progress, desc='Bootstrap draws'))
    failed = np.isnan(draws).all(axis=1) if terms else np.zeros(n_boot, dtype=bool)
    if n_boot - failed.sum() < 2:
        raise NumericalError(f"{int(failed.sum())} of {n_boot} bootstrap draws failed")
    if failed.any():
        logger.warning('%d of %d bootstrap draws failed and are ignored', int(failed.sum()), n_boot)

    valid = draws[~failed]
    meta = copy.deepcopy(DEFAULT_META_BOOTSTRAP)
    meta['name'] = 'ClusteredBootstrap'
    meta['params'].update(n_boot=n_boot, seed=seed, level=level, n_samples=n_samples,
                          estimator=getattr(estimator, 'params', type(estimator).__name__))
    data = copy.deepcopy(DEFAULT_DATA_BOOTSTRAP)
    data.update(terms=terms,
                estimate=estimate.to_numpy(dtype=float),
                draws=draws,
                se=np.nanstd(valid, axis=0, ddof=1),
                ci_lower=np.nanpercentile(valid, 100 * level / 2, axis=0),
                ci_upper=np.nanpercentile(valid, 100 * (1 - level / 2), axis=0),
                n_boot=n_boot,
                n_failed=int(failed.sum()))
    return BootstrapResult(meta=meta, data=data)


def apply_bootstrap(fit: EventStudyFit, result: BootstrapResult) -> EventStudyFit:
    """
    Replace the analytic standard errors and p-values of `fit` by the bootstrap ones, matching terms by name.
    """
    data = copy.deepcopy(fit.data)
    se = np.asarray(data['se'], dtype=float).copy()
    for i, year in enumerate(data['event_years']):
        if year == data['reference_year']:
            continue
        for j, treatment in enumerate(data['treatments']):
            se[i, j] = result.std_err(f'year_{year}_x_{treatment}')
    beta = np.asarray(data['beta'], dtype=float)
    rows = [i for i, y in enumerate(data['event_years']) if y != data['reference_year']]
    p = np.full(beta.shape, np.nan)
    p[rows] = p_values(beta[rows], se[rows])
    data.update(se=se, p=p, p_bonferroni=np.minimum(1., data['bonferroni_m'] * p))
    meta = copy.deepcopy(fit.meta)
    meta['params']['inference'] = 'clustered_bootstrap'
    meta['params']['n_boot'] = result.data['n_boot']
    return EventStudyFit(meta=meta, data=data)

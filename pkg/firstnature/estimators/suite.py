"""
Batteries of event studies: the occupation suite evaluated in a single year with a Bonferroni correction over the
whole battery, and event studies on the age structure.
"""
import logging
from typing import Dict, List, Optional, Sequence

import attr
import numpy as np
import pandas as pd

from firstnature.exceptions import DataError, NumericalError
from firstnature.estimators.event_study import EventStudyFit, EventStudySpec, twfe_event_study
from firstnature.estimators.inference import critical_value
from firstnature.estimators.reporting import ape_share, treated_means
from firstnature.paneldata.census import GROUP_COLUMNS
from firstnature.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

SUITE_TRANSFORMS = ('extensive', 'intensive', 'log1p', 'arcsinh')

SUITE_APPROACHES = ('dummy', 'continuous')

SUITE_COLUMNS = ['group', 'transform', 'approach', 'year', 'estimate', 'se', 'p', 'p_bonferroni', 'ci_lower',
                 'ci_upper', 'ape_share', 'n_parishes', 'n_obs']


def run_event_studies(panel: pd.DataFrame,
                      specs: Sequence[EventStudySpec],
                      n_jobs: Optional[int] = 1,
                      progress: bool = False,
                      skip_failures: bool = False) -> List[Optional[EventStudyFit]]:
    """
    Estimate several event studies on the same panel in parallel. Results follow the order of `specs`.

    Parameters
    ----------
    panel
        Parish x year panel.
    specs
        Specifications.
    n_jobs
        Number of worker threads.
    progress
        Whether to show a progress bar.
    skip_failures
        If True, numerical and data failures are logged and returned as `None` instead of raised.
    """
    def fit_one(spec: EventStudySpec) -> Optional[EventStudyFit]:
        try:
            return twfe_event_study(panel, spec)
        except (NumericalError, DataError) as e:
            if not skip_failures:
                raise
            logger.warning('Event study for %s (%s, %s) failed: %s', spec.outcome, spec.transform, spec.treatment, e)
            return None

    return parallel_map(fit_one, list(specs), n_jobs=n_jobs, progress=progress, desc='Event studies')


def occupation_suite(panel: pd.DataFrame,
                     groups: Optional[Sequence[str]] = None,
                     transforms: Sequence[str] = SUITE_TRANSFORMS,
                     approaches: Sequence[str] = SUITE_APPROACHES,
                     year: int = 1901,
                     reference_year: int = 1801,
                     m: Optional[int] = None,
                     level: float = 0.05,
                     population: str = 'population',
                     n_jobs: Optional[int] = 1,
                     progress: bool = False) -> pd.DataFrame:
    """
    Run the occupation regressions for every (group, transform, approach) and report the `year` coefficient.

    Parameters
    ----------
    panel
        Census panel with treatment columns, see :py:func:`firstnature.paneldata.census.attach_treatment`.
    groups
        Occupation count columns. Defaults to the seven major groups.
    transforms
        Outcome transforms.
    approaches
        Treatment definitions, 'dummy' and/or 'continuous'.
    year
        Reported event year.
    reference_year
        Omitted event year.
    m
        Number of tests for the Bonferroni correction; defaults to the number of regressions, i.e. 56 for the
        default battery.
    level
        Family-wise level of the corrected confidence intervals.
    population
        Population column used for the average partial effect share.
    n_jobs
        Number of worker threads.
    progress
        Whether to show a progress bar.

    Returns
    -------
    One row per regression with the estimate, its standard error, raw and Bonferroni p-values, the Bonferroni
    corrected confidence interval, the average partial effect share and the number of parishes included.
    Regressions that fail numerically are reported with missing values.
    """
    groups = list(GROUP_COLUMNS if groups is None else groups)
    missing = [c for c in groups + [population, 'treatment_dummy'] if c not in panel.columns]
    if missing:
        raise DataError(f"Panel is missing columns {missing}")
    combos = [(g, t, a) for g in groups for t in transforms for a in approaches]
    m = len(combos) if m is None else m
    z = critical_value(m, level)
    specs = [EventStudySpec(outcome=g, transform=t, treatment=a, reference_year=reference_year, bonferroni_m=m)
             for g, t, a in combos]
    fits = run_event_studies(panel, specs, n_jobs=n_jobs, progress=progress, skip_failures=True)

    mean_population = treated_means(panel, population, year=year)
    rows = []
    for (group, transform, approach), fit in zip(combos, fits):
        row = {'group': group, 'transform': transform, 'approach': approach, 'year': year}
        if fit is None or year not in fit.data['event_years']:
            row.update({c: np.nan for c in SUITE_COLUMNS[4:]})
            rows.append(row)
            continue
        i = fit.data['event_years'].index(year)
        beta = float(fit.data['beta'][i, 0])
        se = float(fit.data['se'][i, 0])
        row.update(estimate=beta,
                   se=se,
                   p=float(fit.data['p'][i, 0]),
                   p_bonferroni=float(fit.data['p_bonferroni'][i, 0]),
                   ci_lower=beta - z * se,
                   ci_upper=beta + z * se,
                   ape_share=ape_share(beta, treated_means(panel, group, year=year), mean_population),
                   n_parishes=fit.data['n_parishes_included'],
                   n_obs=fit.data['n_obs'])
        rows.append(row)
    logger.info('Occupation suite: %d regressions, Bonferroni m = %d', len(rows), m)
    return pd.DataFrame(rows, columns=SUITE_COLUMNS)


def age_group_effects(panel: pd.DataFrame,
                      columns: Optional[Sequence[str]] = None,
                      spec: Optional[EventStudySpec] = None,
                      n_jobs: Optional[int] = 1,
                      progress: bool = False) -> Dict[str, EventStudyFit]:
    """
    Event studies on every age share column (`age_*` by default), untransformed unless `spec` says otherwise.
    """
    columns = [c for c in panel.columns if c.startswith('age_')] if columns is None else list(columns)
    if not columns:
        raise DataError('No age group columns in panel')
    template = spec if spec is not None else EventStudySpec(outcome=columns[0], transform='identity')
    specs = [attr.evolve(template, outcome=c) for c in columns]
    fits = run_event_studies(panel, specs, n_jobs=n_jobs, progress=progress)
    return dict(zip(columns, fits))

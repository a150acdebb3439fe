"""
Reporting arithmetic and the long coefficient table written by the command line interface.
"""
import logging
from typing import Mapping, Union

import numpy as np
import pandas as pd

from firstnature.api.interfaces import CoefficientsResult
from firstnature.estimators.event_study import EventStudyFit
from firstnature.estimators.inference import bonferroni_adjust

logger = logging.getLogger(__name__)

COEFFICIENT_COLUMNS = ['spec_id', 'term', 'estimate', 'se', 'p', 'p_bonferroni', 'n_obs', 'n_clusters']


def percent_from_logpoints(beta: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Percentage change `100 * (exp(beta) - 1)` implied by a log-point coefficient.
    """
    out = 100 * np.expm1(np.asarray(beta, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def ape_share(beta: float, mean_occupation: float, mean_population: float) -> float:
    """
    Average partial effect share `mean_occupation * beta / mean_population`: the implied number of people
    gaining an occupation in an average treated parish relative to the average treated parish size.

    Parameters
    ----------
    beta
        Coefficient.
    mean_occupation
        Mean occupation count among treated parishes in the evaluation year.
    mean_population
        Mean population of treated parishes in the evaluation year.
    """
    if mean_population <= 0:
        raise ValueError(f"Mean population must be positive, got {mean_population}")
    if mean_occupation < 0:
        raise ValueError(f"Mean occupation count must be nonnegative, got {mean_occupation}")
    return float(mean_occupation * beta / mean_population)


def treated_means(panel: pd.DataFrame,
                  column: str,
                  year: int = 1901,
                  treatment: str = 'treatment_dummy',
                  time: str = 'year') -> float:
    """
    Mean of `column` over treated parishes in `year`.
    """
    rows = panel.loc[(panel[time] == year) & (panel[treatment] == 1), column]
    if rows.empty:
        raise ValueError(f"No treated parishes observed in {year}")
    return float(rows.mean())


def coefficients_table(fits: Mapping[str, Union[EventStudyFit, CoefficientsResult]]) -> pd.DataFrame:
    """
    Stack fits into one long table with columns `spec_id, term, estimate, se, p, p_bonferroni, n_obs,
    n_clusters`. Omitted reference years of event studies are not reported.
    """
    frames = []
    for spec_id, fit in fits.items():
        if isinstance(fit, EventStudyFit):
            frame = fit.to_frame()
            frame = frame.loc[~frame['reference'], ['term', 'estimate', 'se', 'p', 'p_bonferroni']]
        else:
            frame = fit.to_frame()[['term', 'estimate', 'se', 'p']]
            frame['p_bonferroni'] = bonferroni_adjust(frame['p'].to_numpy(), 1)
        frame.insert(0, 'spec_id', spec_id)
        frame['n_obs'] = fit.data['n_obs']
        frame['n_clusters'] = fit.data['n_clusters']
        frames.append(frame)
    if not frames:
        return pd.DataFrame(columns=COEFFICIENT_COLUMNS)
    return pd.concat(frames, ignore_index=True)[COEFFICIENT_COLUMNS]

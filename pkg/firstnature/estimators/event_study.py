"""
Two-way fixed effects event studies

    y_it = a_i + a_t + sum_{j != ref} 1[t = j] * Treat_i * beta_j + e_it

estimated by removing the parish and year effects (within transformation) followed by least squares, with
standard errors clustered by parish.
"""
import copy
import logging
from typing import Dict, List, Optional, Tuple

import attr
import numpy as np
import pandas as pd

from firstnature.api.defaults import DEFAULT_DATA_EVENT_STUDY, DEFAULT_META_EVENT_STUDY
from firstnature.api.interfaces import Result
from firstnature.exceptions import ConvergenceError, DataError, PanelBalanceError
from firstnature.estimators.inference import critical_value, least_squares, p_values
from firstnature.estimators.transforms import TRANSFORMS, transform_outcome

logger = logging.getLogger(__name__)

TREATMENTS = ('dummy', 'continuous', 'three_region')

DEFAULT_TREATMENT_COLUMNS = {'dummy': 'treatment_dummy', 'continuous': 'delta_log_ma', 'three_region': 'region'}

LIMFJORD_REGIONS = ('west', 'middle', 'east')


def _check_transform(instance, attribute, value):
    if value not in TRANSFORMS:
        raise ValueError(f"Unknown transform '{value}'. Accepted values are {TRANSFORMS}")


def _check_treatment(instance, attribute, value):
    if value not in TREATMENTS:
        raise ValueError(f"Unknown treatment '{value}'. Accepted values are {TREATMENTS}")


@attr.s(frozen=True)
class EventStudySpec:
    """
    Specification of an event study.

    Parameters
    ----------
    outcome
        Outcome column.
    transform
        Outcome transform, see :py:func:`firstnature.estimators.transforms.transform_outcome`.
    treatment
        ``'dummy'`` (west Limfjord indicator), ``'continuous'`` (change in log market access) or
        ``'three_region'`` (simultaneous west, middle and east indicators).
    treatment_column
        Column holding the treatment. Defaults to 'treatment_dummy', 'delta_log_ma' or 'region'.
    reference_year
        Omitted event year.
    event_years
        Years entering the estimation. Defaults to every year in the panel.
    unit, time
        Parish and year columns.
    cluster
        Cluster column, defaults to `unit`.
    bonferroni_m
        Number of tests for the Bonferroni correction. Defaults to the number of estimated coefficients.
    """
    outcome = attr.ib()  # type: str
    transform = attr.ib(default='log', validator=_check_transform)  # type: str
    treatment = attr.ib(default='dummy', validator=_check_treatment)  # type: str
    treatment_column = attr.ib(default=None)  # type: Optional[str]
    reference_year = attr.ib(default=1801, converter=int)  # type: int
    event_years = attr.ib(default=None)  # type: Optional[Tuple[int, ...]]
    unit = attr.ib(default='parish_id')  # type: str
    time = attr.ib(default='year')  # type: str
    cluster = attr.ib(default=None)  # type: Optional[str]
    bonferroni_m = attr.ib(default=None)  # type: Optional[int]

    def __attrs_post_init__(self):
        if self.event_years is not None:
            years = tuple(sorted(int(y) for y in self.event_years))
            object.__setattr__(self, 'event_years', years)
            if self.reference_year not in years:
                raise ValueError(f"Reference year {self.reference_year} is not among the event years {years}")

    @property
    def treatment_col(self) -> str:
        return self.treatment_column or DEFAULT_TREATMENT_COLUMNS[self.treatment]

    @property
    def cluster_col(self) -> str:
        return self.cluster or self.unit


class EventStudyFit(Result):
    """
    Event study estimates. `beta`, `se`, `p` and `p_bonferroni` have shape `(n_event_years, n_treatments)`;
    the reference year row holds zeros (`nan` p-values) since it is omitted from the regression.
    """

    def _row(self, year: int) -> int:
        years = list(self.data['event_years'])
        if year not in years:
            raise KeyError(f"{year} is not an event year")
        return years.index(year)

    def _col(self, treatment: Optional[str]) -> int:
        treatments = list(self.data['treatments'])
        if treatment is None:
            if len(treatments) != 1:
                raise ValueError(f"Specify one of the treatments {treatments}")
            return 0
        return treatments.index(treatment)

    def coef(self, year: int, treatment: Optional[str] = None) -> float:
        return float(np.asarray(self.data['beta'])[self._row(year), self._col(treatment)])

    def std_err(self, year: int, treatment: Optional[str] = None) -> float:
        return float(np.asarray(self.data['se'])[self._row(year), self._col(treatment)])

    def t_stats(self) -> np.ndarray:
        """
        Coefficient over standard error, `nan` in the reference row.
        """
        beta = np.asarray(self.data['beta'], dtype=float)
        se = np.asarray(self.data['se'], dtype=float)
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.where(se > 0, beta / np.where(se > 0, se, 1.), np.nan)

    def to_frame(self, level: float = 0.05, bonferroni: bool = False) -> pd.DataFrame:
        """
        Long format coefficient table with normal confidence intervals at `level`, Bonferroni corrected
        if requested.
        """
        z = critical_value(int(self.data['bonferroni_m']) if bonferroni else 1, level)
        beta = np.asarray(self.data['beta'], dtype=float)
        se = np.asarray(self.data['se'], dtype=float)
        rows = []
        for i, year in enumerate(self.data['event_years']):
            for j, treatment in enumerate(self.data['treatments']):
                rows.append({'term': f'year_{year}_x_{treatment}',
                             'event_year': year,
                             'treatment': treatment,
                             'estimate': beta[i, j],
                             'se': se[i, j],
                             'p': np.asarray(self.data['p'], dtype=float)[i, j],
                             'p_bonferroni': np.asarray(self.data['p_bonferroni'], dtype=float)[i, j],
                             'ci_lower': beta[i, j] - z * se[i, j],
                             'ci_upper': beta[i, j] + z * se[i, j],
                             'reference': year == self.data['reference_year']})
        return pd.DataFrame(rows)


def _group_means(values: np.ndarray, codes: np.ndarray, n_groups: int) -> np.ndarray:
    sums = np.zeros((n_groups, values.shape[1]))
    np.add.at(sums, codes, values)
    counts = np.bincount(codes, minlength=n_groups)[:, None]
    return sums / counts


def demean_two_way(values: np.ndarray,
                   units: np.ndarray,
                   times: np.ndarray,
                   tol: float = 1e-13,
                   max_iter: int = 10000) -> np.ndarray:
    """
    Remove unit and time means. Balanced panels are demeaned in closed form; unbalanced panels by
    alternating projections until every unit mean vanishes.

    Parameters
    ----------
    values
        Array of shape `(N, p)`.
    units, times
        Group labels of the two fixed effects.
    tol
        Convergence tolerance relative to the scale of `values`.
    max_iter
        Maximum number of alternating projections.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        return demean_two_way(values[:, None], units, times, tol, max_iter)[:, 0]
    _, units = np.unique(units, return_inverse=True)
    _, times = np.unique(times, return_inverse=True)
    n_units, n_times = int(units.max()) + 1, int(times.max()) + 1
    cells = units * n_times + times
    if len(np.unique(cells)) != len(cells):
        raise PanelBalanceError('Duplicated unit-time observations')

    if len(cells) == n_units * n_times:
        grand = values.mean(axis=0)
        unit_means = _group_means(values, units, n_units)[units]
        return values - unit_means - _group_means(values, times, n_times)[times] + grand

    out = values.copy()
    scale = max(1., float(np.abs(values).max())) if values.size else 1.
    for _ in range(max_iter):
        out -= _group_means(out, units, n_units)[units]
        out -= _group_means(out, times, n_times)[times]
        if np.abs(_group_means(out, units, n_units)).max() < tol * scale:
            return out
    raise ConvergenceError(f"Two-way demeaning did not converge in {max_iter} iterations")


def _treatment_matrix(frame: pd.DataFrame, spec: EventStudySpec) -> Tuple[np.ndarray, List[str]]:
    column = spec.treatment_col
    if column not in frame.columns:
        raise DataError(f"Treatment column '{column}' not in panel")
    if spec.treatment == 'three_region':
        regions = frame[column]
        return np.column_stack([(regions == r).to_numpy(dtype=float) for r in LIMFJORD_REGIONS]), \
            list(LIMFJORD_REGIONS)
    name = 'treated' if spec.treatment == 'dummy' else 'delta_log_ma'
    return frame[column].to_numpy(dtype=float)[:, None], [name]


def prepare_sample(panel: pd.DataFrame, spec: EventStudySpec) -> pd.DataFrame:
    """
    Estimation sample: the transformed outcome `_y`, restricted to the event years, dropping
    observations with a missing outcome or treatment.
    """
    needed = [spec.unit, spec.time, spec.outcome, spec.treatment_col, spec.cluster_col]
    missing = [c for c in dict.fromkeys(needed) if c not in panel.columns]
    if missing:
        raise DataError(f"Panel is missing columns {missing}")
    frame = panel[list(dict.fromkeys(needed))].copy()
    if spec.event_years is not None:
        frame = frame.loc[frame[spec.time].isin(spec.event_years)]

    transformed = transform_outcome(frame[spec.outcome].to_numpy(dtype=float), spec.transform)
    frame['_y'] = transformed.values
    keep = transformed.mask
    if spec.treatment != 'three_region':
        keep &= frame[spec.treatment_col].notna().to_numpy()
    n_dropped = int((~keep).sum())
    if n_dropped:
        logger.info('Dropping %d of %d observations with missing or excluded outcome/treatment for %s',
                    n_dropped, len(frame), spec.outcome)
    frame = frame.loc[keep]
    if frame.empty:
        raise DataError(f"No observations left to estimate the event study for {spec.outcome}")

    varying = frame.groupby(spec.unit)[spec.treatment_col].nunique(dropna=False) > 1
    if varying.any():
        raise DataError(f"Treatment varies within parishes {list(varying.index[varying])[:5]}")
    return frame


def _estimate(panel: pd.DataFrame, spec: EventStudySpec) -> Tuple[EventStudyFit, np.ndarray]:
    frame = prepare_sample(panel, spec)
    years = sorted(frame[spec.time].unique()) if spec.event_years is None else list(spec.event_years)
    if len(years) < 2:
        raise DataError(f"At least two event years are required, got {years}")
    if spec.reference_year not in years:
        raise ValueError(f"Reference year {spec.reference_year} is not among the event years {years}")
    present = set(frame[spec.time].unique())
    absent = [y for y in years if y not in present]
    if absent:
        raise DataError(f"No observations in event years {absent}")

    treat, treat_names = _treatment_matrix(frame, spec)
    time_values = frame[spec.time].to_numpy()
    estimated_years = [y for y in years if y != spec.reference_year]
    columns, names = [], []
    for year in estimated_years:
        in_year = (time_values == year).astype(float)
        for k, treatment in enumerate(treat_names):
            columns.append(in_year * treat[:, k])
            names.append(f'year_{year}_x_{treatment}')
    X = np.column_stack(columns) if columns else np.empty((len(frame), 0))

    units, _ = pd.factorize(frame[spec.unit], sort=True)
    times, _ = pd.factorize(frame[spec.time], sort=True)
    demeaned = demean_two_way(np.column_stack([frame['_y'].to_numpy(), X]), units, times)
    y_tilde, X_tilde = demeaned[:, 0], demeaned[:, 1:]

    # parish effects are nested in the parish clusters and not counted; year effects and the constant are
    n_params = X.shape[1] + len(years) - 1 + 1
    fit = least_squares(X_tilde, y_tilde, frame[spec.cluster_col].to_numpy(), n_params=n_params, names=names)
    se_flat = np.sqrt(np.clip(np.diag(fit.cov), 0., None))

    n_treat = len(treat_names)
    beta = np.zeros((len(years), n_treat))
    se = np.zeros((len(years), n_treat))
    p = np.full((len(years), n_treat), np.nan)
    rows = [years.index(y) for y in estimated_years]
    beta[rows] = fit.beta.reshape(len(estimated_years), n_treat)
    se[rows] = se_flat.reshape(len(estimated_years), n_treat)
    p[rows] = p_values(beta[rows], se[rows])
    m = spec.bonferroni_m if spec.bonferroni_m is not None else X.shape[1]
    p_bonferroni = np.minimum(1., m * p)

    meta = copy.deepcopy(DEFAULT_META_EVENT_STUDY)
    meta['name'] = 'EventStudy'
    meta['params'].update(attr.asdict(spec))
    data = copy.deepcopy(DEFAULT_DATA_EVENT_STUDY)
    data.update(event_years=[int(y) for y in years],
                treatments=treat_names,
                reference_year=spec.reference_year,
                terms=names,
                beta=beta,
                se=se,
                p=p,
                p_bonferroni=p_bonferroni,
                bonferroni_m=int(m),
                cov=fit.cov,
                n_obs=fit.n_obs,
                n_clusters=fit.n_clusters,
                n_parishes_included=int(frame[spec.unit].nunique()))
    return EventStudyFit(meta=meta, data=data), fit.residuals


def twfe_event_study(panel: pd.DataFrame, spec: EventStudySpec) -> EventStudyFit:
    """
    Estimate an event study with parish and year fixed effects.

    Parameters
    ----------
    panel
        Parish x year panel.
    spec
        Event study specification.

    Returns
    -------
    The fit. With ``spec.treatment == 'three_region'`` the fit has three treatment columns; see
    :py:func:`three_region_event_study` for a per-region split.

    Raises
    ------
    SingularDesignError
        If the interactions are collinear, e.g. when no parish is treated.
    InsufficientClustersError
        If fewer than 2 clusters remain.
    """
    fit, _ = _estimate(panel, spec)
    return fit


def three_region_event_study(panel: pd.DataFrame, spec: Optional[EventStudySpec] = None,
                             outcome: Optional[str] = None, **kwargs) -> Dict[str, EventStudyFit]:
    """
    Joint event study with west, middle and east Limfjord interactions, returned as one fit per region.
    """
    if spec is None:
        if outcome is None:
            raise ValueError('Either a specification or an outcome is required')
        spec = EventStudySpec(outcome=outcome, treatment='three_region', **kwargs)
    elif spec.treatment != 'three_region':
        spec = attr.evolve(spec, treatment='three_region', treatment_column=None)
    joint = twfe_event_study(panel, spec)
    data = joint.data
    n_treat = len(data['treatments'])
    fits = {}
    for k, region in enumerate(data['treatments']):
        idx = np.arange(k, len(data['terms']), n_treat)
        region_data = copy.deepcopy(data)
        region_data.update(treatments=[region],
                           terms=[data['terms'][i] for i in idx],
                           beta=data['beta'][:, [k]],
                           se=data['se'][:, [k]],
                           p=data['p'][:, [k]],
                           p_bonferroni=data['p_bonferroni'][:, [k]],
                           cov=data['cov'][np.ix_(idx, idx)])
        meta = copy.deepcopy(joint.meta)
        meta['params']['region'] = region
        fits[region] = EventStudyFit(meta=meta, data=region_data)
    return fits


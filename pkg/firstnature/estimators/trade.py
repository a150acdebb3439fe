"""
Post x Location regressions on the port x year trade panel, estimated by PPML on the traffic counts or by least
squares on transformed counts. Ports outside the Limfjord ('other') are the reference location.
"""
import copy
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from firstnature.api.defaults import DEFAULT_DATA_OLS, DEFAULT_META_OLS
from firstnature.api.interfaces import CoefficientsResult
from firstnature.exceptions import DataError
from firstnature.estimators.inference import least_squares, p_values
from firstnature.estimators.ppml import PpmlFit, design_matrix, ppml
from firstnature.estimators.transforms import transform_outcome
from firstnature.paneldata.trade import location_dummies

logger = logging.getLogger(__name__)

TRADE_LOCATIONS = ('west', 'middle', 'east')

TRADE_OLS_TRANSFORMS = ('log1p', 'arcsinh', 'extensive')


class OlsFit(CoefficientsResult):
    """
    Least squares estimates with cluster-robust standard errors.
    """
    pass


def trade_design(panel: pd.DataFrame, locations: Sequence[str] = TRADE_LOCATIONS) -> Tuple[pd.DataFrame, list]:
    """
    Regressor columns of the trade design: location dummies, the post indicator and their interactions.

    Parameters
    ----------
    panel
        Trade panel with 'post' and 'location' columns, see
        :py:func:`firstnature.paneldata.trade.build_trade_panel`.
    locations
        Locations with their own level and interaction; everything else is the reference.

    Returns
    -------
    The panel with the design columns added and the list of regressor names.
    """
    missing = {'post', 'location'} - set(panel.columns)
    if missing:
        raise DataError(f"Trade panel is missing columns {sorted(missing)}")
    out = panel.copy()
    names = []
    for location in locations:
        out[f'loc_{location}'] = (out['location'] == location).astype(int)
        names.append(f'loc_{location}')
    names.append('post')
    interactions = location_dummies(out, locations)
    out = pd.concat([out, interactions], axis=1)
    names.extend(list(interactions.columns))
    return out, names


def ols(frame: pd.DataFrame,
        outcome: str,
        regressors: Sequence[str],
        cluster: Optional[str] = None,
        intercept: bool = True) -> OlsFit:
    """
    Least squares with CR1 standard errors clustered on `cluster`, or one cluster per observation.
    """
    X, names = design_matrix(frame, regressors, intercept=intercept)
    y = frame[outcome].to_numpy(dtype=float)
    clusters = frame[cluster].to_numpy() if cluster is not None else np.arange(len(frame))
    fit = least_squares(X, y, clusters, names=names)
    se = np.sqrt(np.clip(np.diag(fit.cov), 0., None))

    meta = copy.deepcopy(DEFAULT_META_OLS)
    meta['name'] = 'OLS'
    meta['params'].update(outcome=outcome, regressors=list(regressors), cluster=cluster, intercept=intercept)
    data = copy.deepcopy(DEFAULT_DATA_OLS)
    data.update(terms=names,
                coefficients=fit.beta,
                se=se,
                p=p_values(fit.beta, se),
                cov=fit.cov,
                n_obs=fit.n_obs,
                n_clusters=fit.n_clusters)
    return OlsFit(meta=meta, data=data)


def trade_ppml(panel: pd.DataFrame, outcome: str = 'traffic', cluster: str = 'port_id', **kwargs) -> PpmlFit:
    """
    PPML estimate of `traffic = exp(b0 + Location b1 + Post b2 + Location x Post b3)` with standard errors
    clustered by port.
    """
    design, names = trade_design(panel)
    fit = ppml(design, outcome, names, cluster=cluster, **kwargs)
    return PpmlFit(meta=dict(fit.meta, name='TradePPML'), data=fit.data)


def trade_ols(panel: pd.DataFrame, transform: str = 'log1p', outcome: str = 'traffic',
              cluster: str = 'port_id') -> OlsFit:
    """
    Least squares version of :py:func:`trade_ppml` on a transformed outcome.

    Parameters
    ----------
    panel
        Trade panel.
    transform
        One of 'log1p', 'arcsinh' or 'extensive'.
    outcome
        Count column.
    cluster
        Cluster column.
    """
    if transform not in TRADE_OLS_TRANSFORMS:
        raise ValueError(f"Unknown transform '{transform}'. Accepted values are {TRADE_OLS_TRANSFORMS}")
    design, names = trade_design(panel)
    transformed = transform_outcome(design[outcome].to_numpy(dtype=float), transform)
    design['_y'] = transformed.values
    fit = ols(design.loc[transformed.mask], '_y', names, cluster=cluster)
    meta = dict(fit.meta, name='TradeOLS')
    meta['params'].update(outcome=outcome, transform=transform)
    return OlsFit(meta=meta, data=fit.data)

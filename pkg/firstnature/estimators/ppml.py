"""
Poisson pseudo maximum likelihood by iteratively reweighted least squares.

The Poisson score is used as an estimating equation only, so the outcome need not be integer valued.
Standard errors are the cluster-robust sandwich with the inverse Fisher information as bread.
"""
import copy
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.special import gammaln

from firstnature.api.defaults import DEFAULT_DATA_PPML, DEFAULT_META_PPML
from firstnature.api.interfaces import CoefficientsResult
from firstnature.exceptions import DataError, SeparationError
from firstnature.estimators.inference import check_rank, cluster_robust_cov, p_values

logger = logging.getLogger(__name__)

INTERCEPT = 'intercept'

DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-10
POLISH_STEPS = 5
MAX_HALVINGS = 30


class PpmlFit(CoefficientsResult):
    """
    Poisson pseudo maximum likelihood estimates.
    """

    def predict(self, frame: pd.DataFrame) -> np.ndarray:
        """
        Conditional means `exp(x'b)` for the regressor columns in `frame`.
        """
        X, _ = design_matrix(frame, [t for t in self.data['terms'] if t != INTERCEPT],
                             intercept=INTERCEPT in self.data['terms'])
        return np.exp(X @ np.asarray(self.data['coefficients'], dtype=float))


def design_matrix(frame: pd.DataFrame, regressors: Sequence[str], intercept: bool = True) -> Tuple[np.ndarray, list]:
    missing = [c for c in regressors if c not in frame.columns]
    if missing:
        raise DataError(f"Missing regressor columns {missing}")
    columns = [frame[c].to_numpy(dtype=float) for c in regressors]
    names = list(regressors)
    if intercept:
        columns.insert(0, np.ones(len(frame)))
        names.insert(0, INTERCEPT)
    X = np.column_stack(columns) if columns else np.empty((len(frame), 0))
    return X, names


def log_likelihood(y: np.ndarray, eta: np.ndarray) -> float:
    """
    Poisson log-likelihood `sum(y * eta - exp(eta) - log(y!))`.
    """
    return float(np.sum(y * eta - np.exp(eta) - gammaln(y + 1)))


def check_separation(X: np.ndarray, y: np.ndarray, names: Sequence[str]) -> None:
    """
    Raise :py:class:`SeparationError` if a one-signed regressor is nonzero only where the outcome is zero; its
    coefficient then diverges to minus infinity.
    """
    for k, name in enumerate(names):
        x = X[:, k]
        nonzero = x != 0
        if not nonzero.any() or not ((x >= 0).all() or (x <= 0).all()):
            continue
        if np.all(y[nonzero] == 0):
            raise SeparationError(f"Regressor '{name}' is separated: all {int(nonzero.sum())} observations "
                                  f"where it is nonzero have a zero outcome")


def _irls_step(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> np.ndarray:
    eta = X @ beta
    mu = np.exp(eta)
    z = eta + (y - mu) / mu
    XtW = X.T * mu
    return linalg.solve(XtW @ X, XtW @ z, assume_a='pos')


def _irls(X: np.ndarray, y: np.ndarray, beta: np.ndarray, max_iter: int, tol: float) -> Tuple[np.ndarray, int, bool]:
    ll = log_likelihood(y, X @ beta)
    for iteration in range(1, max_iter + 1):
        proposal = _irls_step(X, y, beta)
        step = proposal - beta
        ll_new = log_likelihood(y, X @ proposal)
        halvings = 0
        while not ll_new >= ll - 1e-12 * abs(ll) and halvings < MAX_HALVINGS:
            step /= 2
            proposal = beta + step
            ll_new = log_likelihood(y, X @ proposal)
            halvings += 1
        if halvings:
            logger.debug('IRLS iteration %d used %d step halvings', iteration, halvings)
        change = abs(ll_new - ll) / max(abs(ll), 1.)
        beta, ll = proposal, ll_new
        logger.debug('IRLS iteration %d: log-likelihood %.12g', iteration, ll)
        if change < tol:
            return beta, iteration, True
    return beta, max_iter, False


def ppml(frame: pd.DataFrame,
         outcome: str,
         regressors: Sequence[str],
         cluster: Optional[str] = None,
         intercept: bool = True,
         max_iter: int = DEFAULT_MAX_ITER,
         tol: float = DEFAULT_TOL) -> PpmlFit:
    """
    Fit a Poisson pseudo maximum likelihood regression `E[y|x] = exp(x'b)`.

    Parameters
    ----------
    frame
        Estimation data.
    outcome
        Nonnegative outcome column.
    regressors
        Regressor columns.
    cluster
        Cluster column for the standard errors. Defaults to one cluster per observation.
    intercept
        Whether to add a constant.
    max_iter
        Maximum number of IRLS iterations.
    tol
        Convergence tolerance on the relative change of the log-likelihood.

    Returns
    -------
    The fit. Non-converged fits are returned with ``converged=False`` and a warning.

    Raises
    ------
    SeparationError
        If a regressor is perfectly separated by zero outcomes.
    SingularDesignError
        If the design does not have full column rank.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    y = frame[outcome].to_numpy(dtype=float)
    if np.isnan(y).any():
        raise DataError(f"Outcome '{outcome}' has missing values")
    if (y < 0).any():
        raise DataError(f"Outcome '{outcome}' must be nonnegative")
    X, names = design_matrix(frame, regressors, intercept=intercept)
    if np.isnan(X).any():
        raise DataError('Regressors have missing values')
    check_rank(X, names)
    check_separation(X, y, names)

    beta = np.zeros(X.shape[1])
    if intercept:
        beta[0] = np.log(y.mean() + 0.1)
    beta, iterations, converged = _irls(X, y, beta, max_iter, tol)

    # Newton polishing; for the canonical link an IRLS step is a Newton step
    if converged:
        for _ in range(POLISH_STEPS):
            mu = np.exp(X @ beta)
            score = X.T @ (y - mu)
            if np.abs(score).max() < 1e-10:
                break
            beta = _irls_step(X, y, beta)
    else:
        logger.warning('PPML for %s did not converge in %d iterations', outcome, max_iter)

    eta = X @ beta
    mu = np.exp(eta)
    # fitted means collapsed to zero signal quasi-separation
    collapsed = (mu < 1e-12) & (y == 0)
    if collapsed.any() and np.abs(beta).max() > 20:
        raise SeparationError(f"{int(collapsed.sum())} fitted means collapsed to zero; coefficients diverge")

    bread = linalg.inv((X.T * mu) @ X)
    clusters = frame[cluster].to_numpy() if cluster is not None else np.arange(len(frame))
    cov = cluster_robust_cov(X, y - mu, clusters, bread=bread)
    se = np.sqrt(np.clip(np.diag(cov), 0., None))

    meta = copy.deepcopy(DEFAULT_META_PPML)
    meta['name'] = 'PPML'
    meta['params'].update(outcome=outcome, regressors=list(regressors), cluster=cluster, intercept=intercept,
                          max_iter=max_iter, tol=tol)
    data = copy.deepcopy(DEFAULT_DATA_PPML)
    data.update(terms=names,
                coefficients=beta,
                se=se,
                p=p_values(beta, se),
                cov=cov,
                log_likelihood=log_likelihood(y, eta),
                iterations=iterations,
                converged=converged,
                n_obs=len(y),
                n_clusters=int(len(np.unique(clusters))))
    return PpmlFit(meta=meta, data=data)

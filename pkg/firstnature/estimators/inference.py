"""
Least squares with cluster-robust inference and multiple testing corrections.
"""
import logging
from typing import NamedTuple, Optional, Union

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.stats import norm

from firstnature.exceptions import InsufficientClustersError, SingularDesignError

logger = logging.getLogger(__name__)

DEFAULT_LEVEL = 0.05


def cluster_codes(clusters: Union[np.ndarray, pd.Series]) -> np.ndarray:
    """
    Integer codes 0, ..., G - 1 for arbitrary cluster labels.
    """
    codes, _ = pd.factorize(pd.Series(np.asarray(clusters)), sort=True)
    if (codes < 0).any():
        raise ValueError('Cluster labels must not be missing')
    return codes


def check_rank(X: np.ndarray, names=None) -> None:
    """
    Raise :py:class:`SingularDesignError` if `X` does not have full column rank.
    """
    if X.shape[0] < X.shape[1]:
        raise SingularDesignError(f"{X.shape[0]} observations for {X.shape[1]} parameters")
    rank = np.linalg.matrix_rank(X)
    if rank < X.shape[1]:
        # columns that are (numerically) zero are the usual culprits; report them
        zero = np.flatnonzero(np.abs(X).max(axis=0) < 1e-12) if X.size else []
        detail = ''
        if names is not None and len(zero):
            detail = f"; no variation in {[names[i] for i in zero]}"
        raise SingularDesignError(f"Design matrix has rank {rank} < {X.shape[1]}{detail}")


def cluster_robust_cov(X: np.ndarray,
                       residuals: np.ndarray,
                       clusters: Union[np.ndarray, pd.Series],
                       bread: Optional[np.ndarray] = None,
                       n_params: Optional[int] = None) -> np.ndarray:
    """
    CR1 cluster-robust covariance `c * B M B` where `M` sums the outer products of the cluster-summed
    scores and `c = G / (G - 1) * (N - 1) / (N - K)`.

    Parameters
    ----------
    X
        Regressors, shape `(N, k)`.
    residuals
        Residuals, shape `(N,)`.
    clusters
        Cluster label per observation.
    bread
        Inverse Hessian `B`. Defaults to `(X'X)^-1`.
    n_params
        Number of parameters `K` in the small-sample factor. Defaults to `k`; pass a larger number when
        fixed effects not nested in the clusters were partialled out of `X`.

    Returns
    -------
    Covariance matrix of shape `(k, k)`.
    """
    X = np.asarray(X, dtype=float)
    u = np.asarray(residuals, dtype=float)
    n, k = X.shape
    codes = cluster_codes(clusters)
    g = int(codes.max()) + 1 if n else 0
    if g < 2:
        raise InsufficientClustersError(f"Cluster-robust inference needs at least 2 clusters, got {g}")
    K = k if n_params is None else n_params
    if n <= K:
        raise SingularDesignError(f"{n} observations leave no residual degrees of freedom for {K} parameters")
    if bread is None:
        bread = linalg.inv(X.T @ X)
    scores = X * u[:, None]
    cluster_scores = np.zeros((g, k))
    np.add.at(cluster_scores, codes, scores)
    meat = cluster_scores.T @ cluster_scores
    factor = g / (g - 1) * (n - 1) / (n - K)
    cov = factor * bread @ meat @ bread
    return (cov + cov.T) / 2


def cluster_robust_se(X: np.ndarray,
                      residuals: np.ndarray,
                      clusters: Union[np.ndarray, pd.Series],
                      **kwargs) -> np.ndarray:
    """
    Standard errors from :py:func:`cluster_robust_cov`.
    """
    return np.sqrt(np.clip(np.diag(cluster_robust_cov(X, residuals, clusters, **kwargs)), 0., None))


class LeastSquaresFit(NamedTuple):
    beta: np.ndarray
    cov: np.ndarray
    residuals: np.ndarray
    n_obs: int
    n_clusters: int


def least_squares(X: np.ndarray,
                  y: np.ndarray,
                  clusters: Union[np.ndarray, pd.Series],
                  n_params: Optional[int] = None,
                  names=None) -> LeastSquaresFit:
    """
    OLS with CR1 clustered covariance.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    check_rank(X, names)
    beta, *_ = linalg.lstsq(X, y)
    residuals = y - X @ beta
    cov = cluster_robust_cov(X, residuals, clusters, n_params=n_params)
    return LeastSquaresFit(beta=beta, cov=cov, residuals=residuals, n_obs=len(y),
                           n_clusters=len(np.unique(cluster_codes(clusters))))


def p_values(beta: np.ndarray, se: np.ndarray) -> np.ndarray:
    """
    Two-sided p-values against the standard normal. Undefined (`nan`) where the standard error is 0.
    """
    beta = np.asarray(beta, dtype=float)
    se = np.asarray(se, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        z = np.where(se > 0, np.abs(beta) / np.where(se > 0, se, 1.), np.nan)
    return 2 * norm.sf(z)


def bonferroni_adjust(p: Union[float, np.ndarray], m: int) -> Union[float, np.ndarray]:
    """
    Bonferroni adjusted p-values `min(1, m * p)`.
    """
    if m < 1:
        raise ValueError(f"The number of tests must be at least 1, got {m}")
    adjusted = np.minimum(1., m * np.asarray(p, dtype=float))
    return float(adjusted) if np.ndim(adjusted) == 0 else adjusted


def critical_value(m: int = 1, level: float = DEFAULT_LEVEL) -> float:
    """
    Two-sided standard normal critical value at level `level / m`, i.e. the Bonferroni corrected
    confidence interval multiplier.
    """
    if m < 1:
        raise ValueError(f"The number of tests must be at least 1, got {m}")
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level}")
    return float(norm.ppf(1 - level / (2 * m)))

"""
Propensity scores of being a west Limfjord parish given its soil composition.
"""
import copy
import logging
import os
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import expit
from sklearn.linear_model import LogisticRegression
from sklearn.tree import DecisionTreeRegressor

from firstnature.api.defaults import DEFAULT_META_PROPENSITY
from firstnature.api.interfaces import Estimator, FitMixin
from firstnature.exceptions import DataError

logger = logging.getLogger(__name__)

MIN_PARISH_SHARE = 0.10

# step halvings per boosting round before the round is skipped
MAX_HALVINGS = 20

# probabilities are kept away from 0 and 1 in the loss
EPS = 1e-15


def soil_columns(frame: pd.DataFrame, exclude: Sequence[str] = ('parish_id', 'treated')) -> List[str]:
    return [c for c in frame.columns if c not in exclude]


def filter_soil_types(frame: pd.DataFrame,
                      columns: Optional[Sequence[str]] = None,
                      min_parish_share: float = MIN_PARISH_SHARE) -> List[str]:
    """
    Soil types covering part of at least `min_parish_share` of the parishes.

    Parameters
    ----------
    frame
        One row per parish with one area share column per soil type.
    columns
        Soil type columns. Defaults to every column except `parish_id` and `treated`.
    min_parish_share
        Minimum fraction of parishes in which a soil type is present.

    Returns
    -------
    Retained soil type columns.
    """
    if not 0. <= min_parish_share <= 1.:
        raise ValueError(f"min_parish_share must lie in [0, 1], got {min_parish_share}")
    columns = soil_columns(frame) if columns is None else list(columns)
    shares = frame[columns].to_numpy(dtype=float)
    if np.isnan(shares).any() or (shares < 0).any():
        raise DataError('Soil shares must be non-negative')
    if (shares.sum(axis=1) > 1 + 1e-6).any():
        raise DataError('Soil shares of a parish sum to more than 1')
    present = (shares > 0).mean(axis=0) >= min_parish_share
    dropped = [c for c, keep in zip(columns, present) if not keep]
    if dropped:
        logger.info('Dropping %d rare soil types: %s', len(dropped), dropped)
    kept = [c for c, keep in zip(columns, present) if keep]
    if not kept:
        raise DataError(f"No soil type is present in {min_parish_share:.0%} of the parishes")
    return kept


def load_soil(path: Union[str, os.PathLike]) -> pd.DataFrame:
    """
    Read soil shares with columns `parish_id`, `treated` and one column per soil type.
    """
    frame = pd.read_csv(path, comment='#', dtype={'parish_id': str})
    missing = {'parish_id', 'treated'} - set(frame.columns)
    if missing:
        raise DataError(f"{path} is missing columns {sorted(missing)}")
    if frame['parish_id'].duplicated().any():
        raise DataError(f"{path} contains duplicated parishes")
    frame['treated'] = frame['treated'].astype(int)
    return frame


def _check_labels(X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[1] == 0:
        raise DataError('The propensity model needs at least one feature')
    if len(X) != len(y):
        raise ValueError(f"{len(X)} feature rows for {len(y)} labels")
    if not np.isin(y, (0., 1.)).all():
        raise DataError('Labels must be 0 or 1')
    if len(np.unique(y)) < 2:
        raise DataError('Both treated and control parishes are required to fit a propensity model')
    return X, y


def log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, EPS, 1 - EPS)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


class GradientBoostedPropensity(Estimator, FitMixin):

    def __init__(self,
                 max_depth: int = 3,
                 n_rounds: int = 200,
                 learning_rate: float = 0.1,
                 subsample: float = 1.0,
                 reg_lambda: float = 1.0,
                 min_samples_leaf: int = 1,
                 seed: int = 0) -> None:
        """
        Gradient boosted regression trees with a logistic link. Every round fits a depth-limited tree to the
        negative gradient of the log loss and sets each leaf to its Newton step ``-sum(g) / (sum(h) + lambda)``.
        A round whose step would raise the training loss is halved until it does not.

        Parameters
        ----------
        max_depth
            Depth of every tree.
        n_rounds
            Number of boosting rounds.
        learning_rate
            Shrinkage of every tree.
        subsample
            Fraction of parishes drawn without replacement to grow every tree.
        reg_lambda
            L2 penalty on the leaf values.
        min_samples_leaf
            Minimum number of parishes in a leaf.
        seed
            Seeds the subsampling and the tie-breaking between equally good splits.
        """
        meta = copy.deepcopy(DEFAULT_META_PROPENSITY)
        meta['type'] = ['propensity', 'gradient_boosting']
        super().__init__(meta=meta)
        if max_depth < 1 or n_rounds < 1:
            raise ValueError('max_depth and n_rounds must be positive')
        if not 0. < learning_rate <= 1.:
            raise ValueError(f"learning_rate must lie in (0, 1], got {learning_rate}")
        if not 0. < subsample <= 1.:
            raise ValueError(f"subsample must lie in (0, 1], got {subsample}")
        if reg_lambda < 0:
            raise ValueError(f"reg_lambda must be non-negative, got {reg_lambda}")
        self.max_depth = max_depth
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.subsample = subsample
        self.reg_lambda = reg_lambda
        self.min_samples_leaf = min_samples_leaf
        self.seed = seed
        self.meta['params'].update(max_depth=max_depth, n_rounds=n_rounds, learning_rate=learning_rate,
                                   subsample=subsample, reg_lambda=reg_lambda, min_samples_leaf=min_samples_leaf,
                                   seed=seed)
        self.trees = []  # type: List[Tuple[DecisionTreeRegressor, np.ndarray, float]]
        self.base_score = None  # type: Optional[float]
        self.loss_ = []  # type: List[float]
        self.features = None  # type: Optional[List[str]]

    def _round(self, tree: DecisionTreeRegressor, values: np.ndarray, X: np.ndarray) -> np.ndarray:
        return values[tree.apply(X)]

    def fit(self, X: Union[np.ndarray, pd.DataFrame], y: np.ndarray) -> "GradientBoostedPropensity":
        """
        Fit the ensemble. `loss_` holds the training log loss before the first and after every round.
        """
        self.features = list(X.columns) if isinstance(X, pd.DataFrame) else None
        X, y = _check_labels(X, y)
        rng = np.random.default_rng(self.seed)
        n = len(y)
        base_rate = y.mean()
        self.base_score = float(np.log(base_rate / (1 - base_rate)))
        self.trees = []
        F = np.full(n, self.base_score)
        self.loss_ = [log_loss(y, expit(F))]

        for k in range(self.n_rounds):
            p = expit(F)
            grad, hess = p - y, p * (1 - p)
            rows = np.arange(n) if self.subsample == 1. else \
                np.sort(rng.choice(n, size=max(1, int(round(self.subsample * n))), replace=False))
            tree = DecisionTreeRegressor(max_depth=self.max_depth, min_samples_leaf=self.min_samples_leaf,
                                         random_state=int(rng.integers(2 ** 31 - 1)))
            tree.fit(X[rows], -grad[rows])
            leaves = tree.apply(X[rows])
            G = np.bincount(leaves, weights=grad[rows], minlength=tree.tree_.node_count)
            H = np.bincount(leaves, weights=hess[rows], minlength=tree.tree_.node_count)
            values = -G / (H + self.reg_lambda) if self.reg_lambda > 0 else -G / np.maximum(H, EPS)

            update = self._round(tree, values, X)
            step = self.learning_rate
            for _ in range(MAX_HALVINGS):
                if log_loss(y, expit(F + step * update)) <= self.loss_[-1]:
                    break
                step /= 2
            else:
                logger.debug('Boosting round %d does not lower the loss and is skipped', k)
                step = 0.
            F = F + step * update
            self.trees.append((tree, values, step))
            self.loss_.append(log_loss(y, expit(F)))

        logger.info('Boosted %d trees, training log loss %.4f -> %.4f', self.n_rounds, self.loss_[0], self.loss_[-1])
        return self

    def decision_function(self, X: Union[np.ndarray, pd.DataFrame]) -> np.ndarray:
        if self.base_score is None:
            raise ValueError('The model has not been fitted')
        X = np.asarray(X, dtype=float)
        F = np.full(len(X), self.base_score)
        for tree, values, step in self.trees:
            F += step * self._round(tree, values, X)
        return F

    def predict_proba(self, X: Union[np.ndarray, pd.DataFrame]) -> np.ndarray:
        """
        Propensity of every row, strictly inside (0, 1).
        """
        return np.clip(expit(self.decision_function(X)), EPS, 1 - EPS)


class LogisticPropensity(Estimator, FitMixin):

    def __init__(self, C: float = 1.0, max_iter: int = 1000) -> None:
        """
        Logistic regression propensity model for comparison with the boosted trees.

        Parameters
        ----------
        C
            Inverse L2 penalty, see :py:class:`sklearn.linear_model.LogisticRegression`.
        max_iter
            Maximum number of solver iterations.
        """
        meta = copy.deepcopy(DEFAULT_META_PROPENSITY)
        meta['type'] = ['propensity', 'logistic']
        super().__init__(meta=meta)
        self.meta['params'].update(C=C, max_iter=max_iter)
        self.model = LogisticRegression(C=C, max_iter=max_iter)
        self.features = None  # type: Optional[List[str]]

    def fit(self, X: Union[np.ndarray, pd.DataFrame], y: np.ndarray) -> "LogisticPropensity":
        self.features = list(X.columns) if isinstance(X, pd.DataFrame) else None
        X, y = _check_labels(X, y)
        self.model.fit(X, y.astype(int))
        return self

    def predict_proba(self, X: Union[np.ndarray, pd.DataFrame]) -> np.ndarray:
        proba = self.model.predict_proba(np.asarray(X, dtype=float))[:, 1]
        return np.clip(proba, EPS, 1 - EPS)


PropensityModel = Union[GradientBoostedPropensity, LogisticPropensity]


def fit_propensity(soil: pd.DataFrame,
                   model: Optional[PropensityModel] = None,
                   min_parish_share: float = MIN_PARISH_SHARE) -> Tuple[pd.Series, PropensityModel]:
    """
    Filter rare soil types, fit a propensity model on the remaining shares and score every parish.

    Parameters
    ----------
    soil
        Output of :py:func:`load_soil`.
    model
        Unfitted propensity model, defaults to :py:class:`GradientBoostedPropensity`.
    min_parish_share
        See :py:func:`filter_soil_types`.

    Returns
    -------
    Propensity per parish id and the fitted model.
    """
    model = GradientBoostedPropensity() if model is None else model
    features = filter_soil_types(soil, min_parish_share=min_parish_share)
    model.fit(soil[features], soil['treated'].to_numpy())
    scores = pd.Series(model.predict_proba(soil[features]), index=soil['parish_id'].astype(str), name='propensity')
    return scores, model

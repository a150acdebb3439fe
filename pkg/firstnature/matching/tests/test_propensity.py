import numpy as np
import pandas as pd
import pytest
from scipy.special import expit

from firstnature.exceptions import DataError
from firstnature.matching.propensity import (GradientBoostedPropensity, LogisticPropensity, filter_soil_types,
                                             fit_propensity, load_soil)
from firstnature.tests.utils import pairwise_auc


def soil_frame(seed=0, n=200):
    rng = np.random.default_rng(seed)
    clay = rng.uniform(0, .6, n)
    sand = rng.uniform(0, .3, n)
    treated = (rng.random(n) < expit(8 * (clay - .3))).astype(int)
    rare = np.where(np.arange(n) < n // 20, .05, 0.)
    return pd.DataFrame({'parish_id': [f'p{i:03d}' for i in range(n)], 'clay': clay, 'sand': sand,
                         'peat': rare, 'treated': treated})


def test_filter_soil_types():
    soil = soil_frame()
    assert filter_soil_types(soil) == ['clay', 'sand']
    assert filter_soil_types(soil, min_parish_share=.05) == ['clay', 'sand', 'peat']
    with pytest.raises(DataError):
        filter_soil_types(soil.assign(clay=soil.clay + .8))
    with pytest.raises(DataError):
        filter_soil_types(soil.assign(sand=-soil.sand))
    with pytest.raises(DataError):
        filter_soil_types(soil, columns=['peat'])


def test_separating_feature_ranks_perfectly():
    rng = np.random.default_rng(1)
    X = rng.random((150, 2))
    y = (X[:, 0] > .4).astype(int)
    model = GradientBoostedPropensity(n_rounds=30).fit(X, y)
    assert pairwise_auc(model.predict_proba(X), y) == 1.


def test_loss_decreases_every_round():
    soil = soil_frame(2)
    X, y = soil[['clay', 'sand']].to_numpy(), soil['treated'].to_numpy()
    model = GradientBoostedPropensity(n_rounds=40, subsample=.7, seed=3).fit(X, y)
    assert len(model.loss_) == 41
    assert (np.diff(model.loss_) <= 1e-12).all()

    F = np.full(len(y), model.base_score)
    for k, (tree, values, step) in enumerate(model.trees):
        F = F + step * values[tree.apply(X)]
        p = 1 / (1 + np.exp(-F))
        loss = -np.mean(y * np.log(p) + (1 - y) * np.log(1 - p))
        assert loss == pytest.approx(model.loss_[k + 1], rel=1e-10)
    np.testing.assert_allclose(model.predict_proba(X), 1 / (1 + np.exp(-F)))


def test_constant_features_predict_base_rate():
    y = np.array([1, 0, 0, 1, 0, 0, 0, 1])
    model = GradientBoostedPropensity(n_rounds=10).fit(np.ones((8, 3)), y)
    np.testing.assert_allclose(model.predict_proba(np.ones((4, 3))), y.mean(), atol=1e-8)


def test_predictions_are_proper_probabilities():
    soil = soil_frame(4)
    model = GradientBoostedPropensity(n_rounds=200).fit(soil[['clay', 'sand']], soil['treated'])
    p = model.predict_proba(soil[['clay', 'sand']])
    assert ((p > 0) & (p < 1)).all()
    assert model.features == ['clay', 'sand']
    assert model.meta['name'] == 'GradientBoostedPropensity'
    assert model.meta['params']['max_depth'] == 3 and model.meta['params']['learning_rate'] == .1


def test_subsampling_is_seeded():
    soil = soil_frame(5)
    X, y = soil[['clay', 'sand']].to_numpy(), soil['treated'].to_numpy()
    first = GradientBoostedPropensity(n_rounds=20, subsample=.5, seed=9).fit(X, y).predict_proba(X)
    second = GradientBoostedPropensity(n_rounds=20, subsample=.5, seed=9).fit(X, y).predict_proba(X)
    np.testing.assert_array_equal(first, second)


@pytest.mark.parametrize('X, y', [(np.ones((4, 2)), np.ones(4)),
                                  (np.ones((4, 0)), np.array([0, 1, 0, 1])),
                                  (np.ones((4, 2)), np.array([0, 2, 0, 1]))])
def test_invalid_training_data(X, y):
    with pytest.raises(DataError):
        GradientBoostedPropensity(n_rounds=2).fit(X, y)


def test_invalid_hyperparameters():
    with pytest.raises(ValueError):
        GradientBoostedPropensity(learning_rate=0.)
    with pytest.raises(ValueError):
        GradientBoostedPropensity(subsample=1.5)
    with pytest.raises(ValueError):
        GradientBoostedPropensity().predict_proba(np.ones((2, 2)))


def test_logistic_propensity():
    soil = soil_frame(6)
    model = LogisticPropensity().fit(soil[['clay', 'sand']], soil['treated'])
    p = model.predict_proba(soil[['clay', 'sand']])
    assert ((p > 0) & (p < 1)).all()
    assert pairwise_auc(p, soil['treated'].to_numpy()) > .65


@pytest.mark.parametrize('model', [None, LogisticPropensity()])
def test_fit_propensity(model):
    soil = soil_frame(7)
    scores, fitted = fit_propensity(soil, model=model)
    assert scores.index.tolist() == soil['parish_id'].tolist()
    assert fitted.features == ['clay', 'sand']


def test_load_soil(tmp_path):
    soil = soil_frame(8, n=10)
    path = tmp_path / 'soil.csv'
    soil.to_csv(path, index=False)
    loaded = load_soil(path)
    assert loaded['parish_id'].tolist() == soil['parish_id'].tolist()
    soil.drop(columns=['treated']).to_csv(path, index=False)
    with pytest.raises(DataError):
        load_soil(path)

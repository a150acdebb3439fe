import json

import numpy as np
import pytest

from firstnature.api.interfaces import CoefficientsResult, Estimator, FitMixin, NumpyEncoder, Result

valid_meta = {"name": "Simple", "type": ["ols"], "params": {"alpha": 10.}, "version": "0.1.0"}  # type: dict
valid_data = {"terms": ["a", "b"], "coefficients": np.array([1., -2.]), "se": np.array([.5, 1.]),
              "p": np.array([.04, .05])}  # type: dict


class SimpleEstimator(Estimator):
    pass


class SimpleEstimatorWithInit(Estimator):

    def __init__(self):
        super().__init__()
        self.meta['params']['depth'] = 3


class IncompleteFitEstimator(FitMixin, Estimator):
    pass


class SimpleFitEstimator(FitMixin, Estimator):
    def fit(self, X: np.ndarray):
        return self


def test_estimator():
    est = SimpleEstimator()
    assert est.meta["name"] == est.__class__.__name__
    assert est.meta["version"] is not None


def test_estimator_with_init():
    est = SimpleEstimatorWithInit()
    assert est.meta['name'] == est.__class__.__name__
    assert est.meta['params'] == {'depth': 3}


def test_incomplete_fit_estimator():
    with pytest.raises(TypeError):
        _ = IncompleteFitEstimator()


def test_fit_estimator():
    est = SimpleFitEstimator()
    assert est.fit(np.zeros(1)) is est


def test_result_attributes():
    result = Result(meta=valid_meta, data=valid_data)
    assert result.name == "Simple"
    assert result.terms == ["a", "b"]


def test_result_json():
    result = Result(meta=valid_meta, data=valid_data)
    restored = Result.from_json(result.to_json())
    assert restored.meta == valid_meta
    assert restored.data['coefficients'] == [1., -2.]


def test_result_invalid_json():
    with pytest.raises(KeyError):
        Result.from_json(json.dumps({'meta': valid_meta}))


def test_numpy_encoder():
    encoded = json.dumps({'i': np.int64(2), 'b': np.bool_(True), 's': {3, 1}}, cls=NumpyEncoder)
    assert json.loads(encoded) == {'i': 2, 'b': True, 's': [1, 3]}


def test_coefficients_result():
    result = CoefficientsResult(meta=valid_meta, data=valid_data)
    assert result.coef('b') == -2.
    assert result.std_err('a') == .5
    with pytest.raises(KeyError, match='c'):
        result.coef('c')

    table = result.to_frame()
    assert list(table['term']) == ['a', 'b']
    assert table.loc[0, 'ci_lower'] == pytest.approx(1. - 1.959964 * .5, abs=1e-5)
    assert table.loc[1, 'ci_upper'] == pytest.approx(-2. + 1.959964, abs=1e-5)

import logging

import numpy as np
import pandas as pd
import pytest
from shapely.geometry import box

from firstnature.archaeology.activity import (ActivityPanel, exact_activity_probability, finding_records,
                                              load_findings, monte_carlo_panel, resolve_parishes, year_grid)
from firstnature.archaeology.dating import FindingRecord
from firstnature.exceptions import DataError

N_SAMPLES = 1000


def finding(fid, parish, y_min, y_max, model='uniform'):
    return FindingRecord(finding_id=fid, parish_id=parish, kind='coin', y_min=y_min, y_max=y_max,
                         dating_model=model)


FINDINGS = [finding('a', 'p1', 1000, 1099),
            finding('b', 'p1', 1020, 1059),
            finding('c', 'p2', 1180, 1420, 'normal'),
            finding('d', 'p2', 1300, 1300),
            finding('e', 'p3', 760, 1490)]


@pytest.fixture(scope='module')
def panel():
    return monte_carlo_panel(FINDINGS, parish_ids=['p1', 'p2', 'p3', 'p4'], n_samples=N_SAMPLES, seed=7)


def test_year_grid():
    grid = year_grid()
    assert grid[0] == 750 and grid[-1] == 1500 and len(grid) == 16
    assert 1000 in grid
    with pytest.raises(ValueError):
        year_grid(step=0)


def test_empty_findings_give_zero_panel():
    empty = monte_carlo_panel([], parish_ids=['p1', 'p2'], n_samples=10)
    assert empty.replicates.shape == (10, 2, 16)
    assert (empty.probability == 0).all()


@pytest.mark.parametrize('seed', range(1, 21))
def test_single_uniform_finding(seed):
    single = monte_carlo_panel(FINDINGS[:1], n_samples=N_SAMPLES, seed=seed)
    exact = exact_activity_probability(FINDINGS[:1])
    assert exact.loc['p1', 1025] == pytest.approx(.5)
    col = list(single.years).index(1025)
    assert abs(single.probability[0, col] - .5) <= 3 * np.sqrt(.25 / N_SAMPLES)
    # no mass outside the dating interval
    assert single.probability[0, list(single.years).index(1150)] == 0.


@pytest.mark.parametrize('seed', range(1, 21))
def test_two_findings_in_one_parish(seed):
    pair = monte_carlo_panel(FINDINGS[:2], n_samples=N_SAMPLES, seed=seed)
    exact = 1 - .5 * .25
    col = list(pair.years).index(1025)
    assert abs(pair.probability[0, col] - exact) <= 3 * np.sqrt(exact * (1 - exact) / N_SAMPLES)


def test_exact_probability_product_formula():
    exact = exact_activity_probability(FINDINGS[:2])
    assert exact.loc['p1', 1025] == pytest.approx(1 - .5 * .25)
    assert exact.loc['p1', 1075] == pytest.approx(1 - .5 * .75)
    assert exact_activity_probability(FINDINGS[:2], prior_c=.5).loc['p1', 1025] == pytest.approx(.4375)


def test_monte_carlo_converges_to_exact(panel):
    exact = exact_activity_probability(FINDINGS, parish_ids=panel.parish_ids).to_numpy()
    # slack for the discreteness of counts in cells with tiny probabilities
    bound = 4 * np.sqrt(exact * (1 - exact) / N_SAMPLES) + 2 / N_SAMPLES
    assert (np.abs(panel.probability - exact) <= bound).all()
    assert (panel.probability[3] == 0).all()


def test_point_dated_findings_are_deterministic(panel):
    point = monte_carlo_panel([finding('d', 'p2', 1300, 1300)], n_samples=50, seed=3)
    assert (point.replicates == point.replicates[0]).all()
    assert point.probability[0, list(point.years).index(1300)] == 1.


def test_wider_windows_never_lower_probabilities():
    narrow = monte_carlo_panel(FINDINGS, n_samples=200, seed=11, window=25)
    wide = monte_carlo_panel(FINDINGS, n_samples=200, seed=11, window=60)
    assert (wide.replicates >= narrow.replicates).all()


def test_replicates_do_not_depend_on_threads(panel):
    threaded = monte_carlo_panel(FINDINGS, parish_ids=['p1', 'p2', 'p3', 'p4'], n_samples=N_SAMPLES, seed=7,
                                 n_jobs=4)
    np.testing.assert_array_equal(panel.replicates, threaded.replicates)


def test_prior_scaling(panel):
    scaled = panel.with_prior(.25)
    np.testing.assert_allclose(scaled.probability, .25 * panel.probability)
    assert (panel.probability <= 1).all() and (scaled.probability <= .25).all()
    with pytest.raises(ValueError):
        panel.with_prior(0.)


def test_resampled_probability(panel):
    np.testing.assert_allclose(panel.resampled_probability(np.arange(N_SAMPLES)), panel.probability)
    first = panel.resampled_probability(np.zeros(N_SAMPLES, dtype=int))
    np.testing.assert_array_equal(first, panel.replicates[0].astype(float))


def test_to_frame(panel):
    frame = panel.to_frame()
    assert list(frame.columns) == ['parish_id', 'year', 'probability']
    assert len(frame) == 4 * 16
    row = frame.loc[(frame.parish_id == 'p2') & (frame.year == 1300)].iloc[0]
    assert row['probability'] == panel.probability[1, list(panel.years).index(1300)]


def test_invalid_arguments():
    with pytest.raises(ValueError):
        monte_carlo_panel(FINDINGS, n_samples=0)
    with pytest.raises(DataError):
        monte_carlo_panel(FINDINGS, parish_ids=['p1'])
    with pytest.raises(ValueError):
        ActivityPanel(parish_ids=['p1'], years=[1000, 1050], replicates=np.zeros((3, 2, 2), dtype=bool))


@pytest.fixture
def registry():
    return pd.DataFrame({'finding_id': ['f1', 'f2', 'f3', 'f4', 'f5', 'f6', 'f7'],
                         'lon': [.5, 1.5, 5., .5, .5, 1., 1.2],
                         'lat': [.5, .5, 5., .5, .5, .5, .2],
                         'kind': ['coin', 'Coins', 'coin', 'grave', 'coin', 'building', 'building'],
                         'year_min': [1000, 1100, 1000, 1000, 600, 1200, 1400],
                         'year_max': [1100, 1200, 1100, 1100, 800, 1250, 1500]})


def test_resolve_parishes(registry, caplog):
    polygons = {'b': box(1, 0, 2, 1), 'a': box(0, 0, 1, 1)}
    with caplog.at_level(logging.WARNING):
        resolved = resolve_parishes(registry, polygons)
    assert resolved['finding_id'].tolist() == ['f1', 'f2', 'f6', 'f7']
    # the border finding f6 goes to the first parish in id order
    assert resolved['parish_id'].tolist() == ['a', 'b', 'a', 'b']
    assert resolved['kind'].tolist() == ['coin', 'coin', 'building', 'building']
    assert 'outside all parish polygons' in caplog.text

    coins = resolve_parishes(registry, polygons, kinds=('coin',))
    records = finding_records(coins, dating_model='normal')
    assert [r.finding_id for r in records] == ['f1', 'f2']
    assert all(r.dating_model == 'normal' for r in records)


def test_load_findings(tmp_path, registry):
    path = tmp_path / 'findings.csv'
    with open(path, 'w') as f:
        f.write('# config_hash=abc seed=1\n')
        registry.to_csv(f, index=False)
    loaded = load_findings(path)
    assert loaded['kind'].tolist()[1] == 'coins'
    assert len(loaded) == 7
    registry.drop(columns=['year_max']).to_csv(path, index=False)
    with pytest.raises(DataError):
        load_findings(path)

import logging

import numpy as np
import pandas as pd
import pytest

from firstnature.exceptions import DataError
from firstnature.matching.greedy import (MATCH_COLUMNS, balance_report, greedy_match, load_matches, matched_sample,
                                         matching_pools)
from firstnature.tests.utils import greedy_replay


def test_nearest_control():
    match = greedy_match({'t': .9, 'a': .1, 'b': .85}, ['t'], ['a', 'b'])
    assert match.data['pairs'] == [('t', 'b')]
    assert match.data['deltas'][0] == pytest.approx(.05)


def test_ties_go_to_smaller_control_id():
    match = greedy_match({'t': .5, 'c1': .25, 'c0': .75}, ['t'], ['c1', 'c0'])
    assert match.data['pairs'] == [('t', 'c0')]


def test_equal_scores():
    scores = {f'p{i}': .3 for i in range(10)}
    match = greedy_match(scores, ['p0', 'p1', 'p2'], [f'p{i}' for i in range(3, 10)])
    assert (match.data['deltas'] == 0).all()
    assert len({c for _, c in match.data['pairs']}) == 3


@pytest.mark.parametrize('seed', range(10))
def test_matches_sequential_replay(seed):
    rng = np.random.default_rng(seed)
    scores = pd.Series(rng.random(70), index=[f'p{i:02d}' for i in range(70)])
    treated, controls = list(scores.index[:20]), list(scores.index[20:])
    match = greedy_match(scores, treated, controls, seed=seed)
    assert match.data['pairs'] == greedy_replay(scores.to_dict(), treated, controls, match.data['order'])
    assert sorted(match.data['order']) == sorted(treated)
    assert len({c for _, c in match.data['pairs']}) == 20
    assert not match.data['unmatched']
    again = greedy_match(scores, treated, controls, seed=seed)
    assert again.data['pairs'] == match.data['pairs']


def test_visiting_order_depends_on_seed():
    scores = {f'p{i:02d}': i / 100 for i in range(40)}
    orders = {tuple(greedy_match(scores, list(scores)[:10], list(scores)[10:], seed=s).data['order'])
              for s in range(5)}
    assert len(orders) > 1


def test_unmatched_when_controls_run_out(caplog):
    scores = {f't{i}': i / 10 for i in range(5)}
    scores.update({'c0': .1, 'c1': .2, 'c2': .3})
    with caplog.at_level(logging.WARNING):
        match = greedy_match(scores, [f't{i}' for i in range(5)], ['c0', 'c1', 'c2'], seed=1)
    assert len(match.data['pairs']) == 3 and len(match.data['unmatched']) == 2
    assert set(match.data['unmatched']) == set(match.data['order'][3:])
    assert 'left unmatched' in caplog.text


def test_invalid_inputs():
    with pytest.raises(DataError):
        greedy_match({'a': .1, 'b': .2}, ['a'], ['a', 'b'])
    with pytest.raises(DataError):
        greedy_match({'a': .1}, ['a'], ['b'])


def test_matching_pools():
    treated = pd.Series({'w1': 1, 'w2': 1, 'm1': 0, 'e1': 0, 'o1': 0, 'o2': 0})
    regions = {'w1': 'west', 'w2': 'west', 'm1': 'middle', 'e1': 'east', 'o1': None}
    assert matching_pools(treated, regions) == (['w1', 'w2'], ['o1', 'o2'])
    assert matching_pools(treated, regions, include_limfjord_controls=True)[1] == ['e1', 'm1', 'o1', 'o2']
    assert matching_pools(treated)[1] == ['e1', 'm1', 'o1', 'o2']


def test_balance_report():
    rng = np.random.default_rng(3)
    treated = [f't{i}' for i in range(30)]
    controls = [f'c{i}' for i in range(120)]
    scores = pd.Series(np.concatenate([rng.beta(5, 2, 30), rng.beta(2, 5, 120)]), index=treated + controls)
    match = greedy_match(scores, treated, controls, seed=0)
    report = balance_report(match, scores, treated, controls)
    assert report.index.tolist() == ['before', 'after']
    assert report.loc['after', 'smd'] < report.loc['before', 'smd']
    assert report.loc['after', 'mean_abs_delta'] <= report.loc['before', 'mean_abs_delta']
    assert report.loc['after', 'n_treated'] == 30 and report.loc['before', 'n_control'] == 120


def test_perfect_matches_are_balanced():
    scores = {'t0': .2, 't1': .7, 'c0': .2, 'c1': .7, 'c2': .9}
    match = greedy_match(scores, ['t0', 't1'], ['c0', 'c1', 'c2'])
    report = balance_report(match, scores, ['t0', 't1'], ['c0', 'c1', 'c2'])
    assert report.loc['after', 'smd'] == 0.
    assert report.loc['after', 'mean_abs_delta'] == 0.
    assert sorted(matched_sample(match)) == ['c0', 'c1', 't0', 't1']


def test_matches_csv(tmp_path):
    match = greedy_match({'t0': .2, 't1': .7, 'c0': .25, 'c1': .6}, ['t0', 't1'], ['c0', 'c1'])
    path = tmp_path / 'matches.csv'
    match.write_csv(path, header='# config_hash=0 seed=0')
    assert path.read_text().startswith('# config_hash=0 seed=0\ntreated_id,')
    loaded = load_matches(path)
    assert list(loaded.columns) == MATCH_COLUMNS
    assert sorted(zip(loaded.treated_id, loaded.control_id)) == [('t0', 'c0'), ('t1', 'c1')]

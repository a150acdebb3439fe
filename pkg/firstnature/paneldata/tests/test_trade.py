import logging

import numpy as np
import pandas as pd
import pytest

from firstnature.exceptions import DataError
from firstnature.paneldata.trade import (EXCLUSION_WINDOWS, build_trade_panel, load_port_locations, location_dummies,
                                         trade_location_classes)


def test_yearly_sum():
    toll = pd.DataFrame({'port_id': ['a', 'a', 'a'], 'year': [1800, 1800, 1801], 'passages': [2, 3, 1]})
    panel = build_trade_panel(toll, {'a': 'west'}).set_index(['port_id', 'year'])
    assert panel.loc[('a', 1800), 'traffic'] == 5
    assert panel.loc[('a', 1801), 'traffic'] == 1
    assert panel.loc[('a', 1750), 'traffic'] == 0
    assert panel.loc[('a', 1833), 'post'] == 0
    assert panel.loc[('a', 1834), 'post'] == 1


def test_exclusion_windows():
    toll = pd.DataFrame({'port_id': ['a'], 'year': [1810], 'passages': [4]})
    panel = build_trade_panel(toll, {'a': 'east'}, exclude_windows=EXCLUSION_WINDOWS)
    assert not panel['year'].between(1807, 1814).any()
    assert not panel['year'].between(1825, 1833).any()
    assert len(panel) == 106 - 8 - 9


def test_full_grid_size():
    rng = np.random.default_rng(0)
    ports = [f'port{i:03d}' for i in range(126)]
    toll = pd.DataFrame({'port_id': rng.choice(ports, 2000), 'year': rng.integers(1750, 1856, 2000),
                         'passages': rng.integers(1, 5, 2000)})
    locations = {p: ('west', 'middle', 'east', 'other')[i % 4] for i, p in enumerate(ports)}
    panel = build_trade_panel(toll, locations)
    assert len(panel) == 13356
    assert panel['traffic'].sum() == toll['passages'].sum()
    assert (panel['traffic'] >= 0).all()


def test_unmapped_port_is_other(caplog):
    toll = pd.DataFrame({'port_id': ['a', 'zz'], 'year': [1800, 1800], 'passages': [1, 1]})
    with caplog.at_level(logging.WARNING):
        panel = build_trade_panel(toll, {'a': 'west'})
    assert set(panel.loc[panel.port_id == 'zz', 'location']) == {'other'}
    assert 'zz' in caplog.text


def test_records_outside_range_dropped():
    toll = pd.DataFrame({'port_id': ['a', 'a'], 'year': [1700, 1800], 'passages': [9, 1]})
    panel = build_trade_panel(toll, {'a': 'west'})
    assert panel['traffic'].sum() == 1
    assert panel['year'].min() == 1750 and panel['year'].max() == 1855


@pytest.mark.parametrize('passages', [-1, np.nan])
def test_negative_passages(passages):
    toll = pd.DataFrame({'port_id': ['a'], 'year': [1800], 'passages': [passages]})
    with pytest.raises(DataError):
        build_trade_panel(toll, {'a': 'west'})


def test_location_classes_and_dummies(tmp_path):
    assert trade_location_classes({'a': 'west', 'b': 'reference', 'c': None}) == {'a': 'west', 'b': 'other',
                                                                                  'c': 'other'}
    path = tmp_path / 'ports.csv'
    path.write_text('port_id,location\na,middle\nb,\n')
    assert load_port_locations(path) == {'a': 'middle', 'b': 'other'}
    panel = pd.DataFrame({'post': [0, 1, 1, 1], 'location': ['west', 'west', 'middle', 'other']})
    dummies = location_dummies(panel)
    assert list(dummies.columns) == ['post_x_west', 'post_x_middle', 'post_x_east']
    assert dummies['post_x_west'].tolist() == [0, 1, 0, 0]
    assert dummies['post_x_middle'].tolist() == [0, 0, 1, 0]
    assert dummies['post_x_east'].sum() == 0

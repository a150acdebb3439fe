import json

import matplotlib
import numpy as np
import pandas as pd
import pytest

from firstnature.cli import commands
from firstnature.cli.main import main
from firstnature.exceptions import SingularDesignError
from firstnature.saving import load_model

matplotlib.use('Agg')

QUIET = ['--log-level', 'WARNING']

# small Monte Carlo and bootstrap sizes keep the activity commands fast
ARCH_FLAGS = ['--n-samples', '40', '--n-boot', '12']


def run(config, out, *args):
    return main(QUIET + ['--config', str(config), '--out-dir', str(out)] + list(args))


def read(path):
    return pd.read_csv(path, comment='#', dtype={'parish_id': str, 'treated_id': str, 'control_id': str})


def first_line(path):
    with open(path) as f:
        return f.readline().rstrip('\n')


def test_synth(world_dir, world_config):
    for name in ('raster.asc', 'parishes.csv', 'ports.csv', 'census.csv', 'findings.csv', 'soil.csv',
                 'ground_truth.json', 'firstnature.ini'):
        assert (world_dir / name).exists()
    assert first_line(world_dir / 'parishes.csv').startswith('# config_hash=')
    assert 'seed = 42' in world_config.read_text()


def test_costdist(world_config, tmp_path):
    # a point in the western sea
    assert run(world_config, tmp_path, 'costdist', '--source', '1', '41') == 0
    table = read(tmp_path / 'cost_distance.csv')
    assert list(table.columns) == ['col', 'row', 'distance']
    assert len(table) == 40 * 60
    assert table['distance'].min() == 0.
    assert first_line(tmp_path / 'cost_distance.csv').endswith('seed=42')


def test_ma(world_config, ground_truth, tmp_path):
    assert run(world_config, tmp_path, 'ma') == 0
    ma = read(tmp_path / 'market_access.csv').set_index('parish_id')
    treated = ground_truth['treated_parishes']
    assert (ma.loc[treated, 'delta_log_ma'] > 0).all()
    assert (ma['theta'] == -1.).all() and (ma['alpha'] == 10.).all()


def test_eventstudy(world_config, ground_truth, tmp_path):
    assert run(world_config, tmp_path, '--svg', 'eventstudy') == 0
    table = read(tmp_path / 'event_study.csv').set_index('event_year')
    row = table.loc[1901]
    assert abs(row['estimate'] - ground_truth['event_effects']['1901']) < 3 * row['se']
    assert table.loc[1801, 'estimate'] == 0.
    assert (tmp_path / 'event_study.svg').exists()


def test_eventstudy_suite(world_config, tmp_path):
    assert run(world_config, tmp_path, 'eventstudy', '--suite') == 0
    suite = read(tmp_path / 'occupation_suite.csv')
    assert set(suite['approach']) == {'dummy', 'continuous'}
    assert (suite['year'] == 1901).all()


def test_ppml(world_config, ground_truth, tmp_path):
    assert run(world_config, tmp_path, 'ppml') == 0
    ppml = read(tmp_path / 'trade_ppml.csv').set_index('term')
    assert ppml.loc['post_x_west', 'estimate'] == pytest.approx(ground_truth['trade_effects']['west'], abs=.2)
    ols = read(tmp_path / 'trade_ols.csv')
    assert set(ols['transform']) == {'log1p', 'arcsinh', 'extensive'}


def test_arch_deterministic(world_config, tmp_path):
    outputs = []
    for threads in ('1', '1', '3'):
        out = tmp_path / f'run{len(outputs)}'
        assert run(world_config, out, '--threads', threads, *ARCH_FLAGS, '--set', 'toggles.write_cache=yes',
                   'arch') == 0
        outputs.append({name: (out / name).read_bytes() for name in
                        ('arch_coin.csv', 'arch_building.csv', 'activity_coin.csv', 'replicates_coin.apsa')})
    assert outputs[0] == outputs[1] == outputs[2]


def test_arch_decline(world_config, tmp_path):
    assert run(world_config, tmp_path, *ARCH_FLAGS, 'arch') == 0
    table = read(tmp_path / 'arch_building.csv')
    assert set(table['treatment']) == {'treated'}
    assert table.loc[table['event_year'] == 1000, 'estimate'].item() == 0.
    activity = read(tmp_path / 'activity_building.csv')
    assert activity['probability'].between(0, 1).all()


def test_arch_continuous(world_config, tmp_path):
    assert run(world_config, tmp_path, *ARCH_FLAGS, '--approach', 'continuous', 'arch') == 0
    assert set(read(tmp_path / 'arch_coin.csv')['treatment']) == {'delta_log_ma'}


def test_match(world_config, ground_truth, tmp_path):
    model_dir = tmp_path / 'model'
    assert run(world_config, tmp_path, '--svg', 'match', '--save-model', str(model_dir)) == 0
    matches = read(tmp_path / 'matches.csv')
    assert set(matches['treated_id']) <= set(ground_truth['treated_parishes'])
    assert not set(matches['control_id']) & set(ground_truth['treated_parishes'])
    assert matches['control_id'].is_unique
    balance = pd.read_csv(tmp_path / 'balance.csv', comment='#', index_col='sample')
    assert list(balance.index) == ['before', 'after']
    assert balance.loc['after', 'n_treated'] == len(matches)
    assert (tmp_path / 'propensity_balance.svg').exists()

    scores = read(tmp_path / 'propensity.csv').set_index('parish_id')['propensity']
    model = load_model(model_dir)
    assert model.meta['name'] == 'GradientBoostedPropensity'
    assert scores.between(0, 1).all()


def test_pipeline(world_config, ground_truth, tmp_path):
    assert run(world_config, tmp_path, *ARCH_FLAGS, 'pipeline') == 0
    table = read(tmp_path / 'coefficients.csv')
    specs = set(table['spec_id'])
    assert {'census_dummy', 'census_continuous', 'census_three_region', 'census_matched', 'trade_ppml',
            'arch_coin', 'arch_building'} <= specs
    dummy = table.loc[(table['spec_id'] == 'census_dummy') & (table['term'] == 'year_1901_x_treated')].iloc[0]
    assert abs(dummy['estimate'] - ground_truth['event_effects']['1901']) < 3 * dummy['se']

    # unchanged inputs give unchanged outputs
    first = (tmp_path / 'coefficients.csv').read_bytes()
    assert run(world_config, tmp_path, *ARCH_FLAGS, 'pipeline') == 0
    assert (tmp_path / 'coefficients.csv').read_bytes() == first


def test_multiverse(world_config, tmp_path):
    code = run(world_config, tmp_path, '--set', 'parameters.theta_grid=-1,-4', '--set', 'parameters.alpha_grid=5,20',
               '--set', 'toggles.subgroups=all,no_copenhagen', 'pipeline', '--multiverse')
    assert code == 0
    table = read(tmp_path / 'multiverse.csv')
    cells = table[['theta', 'alpha', 'subgroup']].drop_duplicates()
    assert len(cells) == 8
    assert set(table['label'].fillna('')) == {'', 'B'}
    assert not (table['event_year'] == 1801).any()


def test_missing_seed(tmp_path, capsys):
    assert main(QUIET + ['--out-dir', str(tmp_path), 'ma']) == 2
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error == {'error': 'ConfigError', 'message': error['message'], 'exit_code': 2}
    assert 'seed' in error['message']


def test_missing_path(tmp_path, capsys):
    assert main(QUIET + ['--seed', '1', '--out-dir', str(tmp_path), 'ma']) == 2
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])['exit_code'] == 2


def test_invalid_parameter(world_config, tmp_path, capsys):
    assert run(world_config, tmp_path, '--alpha', '0.5', 'ma') == 2
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])['error'] == 'ValueError'


def test_data_error(world_config, tmp_path, capsys):
    bad = tmp_path / 'bad.asc'
    bad.write_text('ncols 2\nnrows 1\ncellsize 1\n0 5\n')
    assert run(world_config, tmp_path, '--set', f'paths.raster={bad}', 'ma') == 3
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])['error'] == 'RasterFormatError'


def test_numerical_error(world_config, tmp_path, capsys, monkeypatch):
    def singular(ctx, args):
        raise SingularDesignError('collinear treatment')

    monkeypatch.setitem(commands.COMMANDS, 'eventstudy', singular)
    assert run(world_config, tmp_path, 'eventstudy') == 4
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error == {'error': 'SingularDesignError', 'message': 'collinear treatment', 'exit_code': 4}


def test_linalg_error_is_numerical(world_config, tmp_path, monkeypatch):
    def failing(ctx, args):
        raise np.linalg.LinAlgError('Singular matrix')

    monkeypatch.setitem(commands.COMMANDS, 'ppml', failing)
    assert run(world_config, tmp_path, 'ppml') == 4

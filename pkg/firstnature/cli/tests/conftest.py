import json

import pytest

from firstnature.cli.main import main

SEED = 42


@pytest.fixture(scope='module')
def world_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp('world')
    code = main(['--seed', str(SEED), '--out-dir', str(out), '--log-level', 'WARNING',
                 'synth', '--n-parishes', '30', '--mean-population', '60'])
    assert code == 0
    return out


@pytest.fixture(scope='module')
def world_config(world_dir):
    return world_dir / 'firstnature.ini'


@pytest.fixture(scope='module')
def ground_truth(world_dir):
    with open(world_dir / 'ground_truth.json') as f:
        return json.load(f)

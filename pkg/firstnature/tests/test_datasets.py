import json

import numpy as np
import pandas as pd
import pytest

from firstnature.access.market_access import compute_market_access, load_parishes, load_ports
from firstnature.archaeology.activity import load_findings, resolve_parishes
from firstnature.datasets import generate_synthetic_world, write_synthetic_world
from firstnature.estimators.event_study import EventStudySpec, twfe_event_study
from firstnature.exceptions import DataError
from firstnature.geo.raster import LAND, WATER, load_polygons, open_waterway, read_ascii_grid
from firstnature.paneldata.census import aggregate_census, attach_treatment


@pytest.fixture(scope='module')
def world():
    return generate_synthetic_world(seed=42, n_parishes=30, mean_population=60.)


def test_layout(world):
    cells = world.surface.cells
    assert (cells[:, :4] == WATER).all() and (cells[:3] == WATER).all()
    channel_cells = cells[19:22, 4:8]
    assert (channel_cells == LAND).all()
    assert (open_waterway(world.surface, [world.channel]).cells[19:22, 4:8] == WATER).all()
    assert len(world.parishes) == 30 == len(world.parish_polygons)
    assert world.ground_truth['treated_parishes'] == sorted(p.id for p in world.parishes if p.region == 'west')
    assert world.ground_truth['treated_parishes']


def test_opening_the_channel(world):
    opened = open_waterway(world.surface, [world.channel])
    ma = compute_market_access(world.parishes, world.ports, -1., world.surface, surface_after=opened)
    delta = ma.set_index('parish_id')['delta_log_ma']
    west = [p.id for p in world.parishes if p.region == 'west']
    assert (delta[west] > 0).all()

    port_b = np.array(world.ports[1].location)
    reference = [p for p in world.parishes if p.region == 'reference']
    far = sorted(reference, key=lambda p: np.hypot(*(np.array(p.centroid) - port_b)))[:3]
    far_delta = delta[[p.id for p in far]]
    assert (far_delta.abs() < .1).all()
    assert delta[west].mean() > 5 * far_delta.abs().mean()


def test_injected_population_effect(world):
    panel = aggregate_census(world.census, counties=world.counties)
    panel = attach_treatment(panel, {p.id: p.region for p in world.parishes})
    fit = twfe_event_study(panel, EventStudySpec(outcome='population'))
    assert abs(fit.coef(1901) - .25) < 3 * fit.std_err(1901)
    assert abs(fit.coef(1787)) < 3 * fit.std_err(1787)


def test_activity_decline():
    world = generate_synthetic_world(seed=3, n_parishes=30, mean_population=5., activity_decline=1.)
    findings = world.findings
    west = findings['parish_id'].isin(world.ground_truth['treated_parishes'])
    assert (findings.loc[west, 'year_min'] < 1200).all()
    assert (findings['year_min'] >= 750).all() and (findings['year_max'] <= 1500).all()
    assert set(findings['kind']) <= {'coin', 'building'}


def test_soil_shares(world):
    shares = world.soil.drop(columns=['parish_id', 'treated'])
    assert (shares.to_numpy() >= 0).all()
    assert (shares.sum(axis=1) <= 1 + 1e-9).all()
    assert world.soil['treated'].sum() == len(world.ground_truth['treated_parishes'])


def test_seeded():
    first = generate_synthetic_world(seed=5, n_parishes=20, mean_population=10.)
    second = generate_synthetic_world(seed=5, n_parishes=20, mean_population=10.)
    pd.testing.assert_frame_equal(first.census, second.census)
    pd.testing.assert_frame_equal(first.findings, second.findings)
    assert first.ground_truth == second.ground_truth


@pytest.mark.parametrize('kwargs, error', [({'channel_col': 70}, DataError),
                                           ({'channel_col': 0}, DataError),
                                           ({'cell_km': -1.}, ValueError),
                                           ({'n_parishes': 0}, ValueError),
                                           ({'event_effects': {1801: .1}}, ValueError),
                                           ({'event_effects': {1900: .1}}, ValueError),
                                           ({'n_parishes': 2000}, ValueError)])
def test_invalid_worlds(kwargs, error):
    with pytest.raises(error):
        generate_synthetic_world(**kwargs)


def test_write_synthetic_world(world, tmp_path):
    paths = write_synthetic_world(world, tmp_path, header='# config_hash=abc seed=42')
    assert all(path.exists() for path in paths.values())
    assert paths['census'].read_text().startswith('# config_hash=abc seed=42\n')

    np.testing.assert_array_equal(read_ascii_grid(paths['raster']).values, world.surface.cells)
    parishes = load_parishes(paths['parishes'])
    assert [p.region for p in parishes] == [p.region for p in world.parishes]
    assert [p.id for p in load_ports(paths['ports'])] == ['A', 'B', 'C']

    polygons = load_polygons(paths['parish_polygons'], id_property='id')
    resolved = resolve_parishes(load_findings(paths['findings']), polygons)
    assert len(resolved) == len(world.findings)
    merged = resolved.merge(world.findings[['finding_id', 'parish_id']], on='finding_id', suffixes=('', '_true'))
    assert (merged['parish_id'] == merged['parish_id_true']).all()

    with open(paths['ground_truth']) as f:
        assert json.load(f)['event_effects']['1901'] == .25

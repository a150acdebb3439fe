import logging

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from firstnature.access.market_access import (ParishSite, Port, compute_market_access, delta_log_ma, eligible_ports,
                                              load_parishes, load_ports, market_access, market_access_from_distances,
                                              port_distance_matrix, standardize)
from firstnature.exceptions import UnreachableParishError
from firstnature.geo.raster import NODATA, CostSurface
from firstnature.geo.tests.utils import fjord_land_mask
from firstnature.tests.utils import bellman_ford, grid_edge_list


@pytest.fixture(scope='module')
def water_row():
    return CostSurface.from_array(np.zeros((1, 5)), alpha=10)


@pytest.fixture(scope='module')
def fjord_surface():
    return CostSurface.from_array(fjord_land_mask(), alpha=10)


def at_col(col):
    return (col + 0.5, 0.5)


def test_port_on_parish_cell(water_row):
    parish = ParishSite('p', at_col(2))
    for theta in (-1., -4., -16.):
        assert market_access(parish, [Port('h', at_col(2))], theta, water_row) == 1.


def test_two_ports_direct_evaluation(water_row):
    parish = ParishSite('p', at_col(0))
    ports = [Port('near', at_col(1)), Port('far', at_col(3))]
    assert market_access(parish, ports, -1., water_row) == 0.75


def test_delta_log_ma_adding_near_port(water_row):
    parish = ParishSite('p', at_col(0))
    ports = [Port('far', at_col(3)), Port('near', at_col(1), in_baseline=False)]
    record = delta_log_ma(parish, ports, -1., water_row)
    assert record.ma_before == 0.25
    assert record.ma_after == 0.75
    assert abs(record.delta_log_ma - np.log(3.)) < 1e-12
    assert record.alpha == 10.


def test_delta_log_ma_identity(water_row):
    parish = ParishSite('p', at_col(0))
    ports = [Port('a', at_col(3)), Port('b', at_col(4))]
    assert delta_log_ma(parish, ports, -2., water_row).delta_log_ma == 0.


def test_market_access_matches_bellman_ford(fjord_surface):
    rng = np.random.default_rng(0)
    cells = fjord_surface.cells
    edges = grid_edge_list(cells, alpha=10)
    land_cells = np.argwhere(cells == 1)
    water_cells = np.argwhere(cells == 0)
    parish_cells = land_cells[rng.choice(len(land_cells), size=10, replace=False)]
    port_cells = water_cells[rng.choice(len(water_cells), size=4, replace=False)]
    height = fjord_surface.height
    ports = [Port(f'h{i}', (c + 0.5, height - r - 0.5)) for i, (r, c) in enumerate(port_cells)]
    for r, c in parish_cells:
        parish = ParishSite(f'{r}-{c}', (c + 0.5, height - r - 0.5))
        dist = bellman_ford(cells.size, edges, r * fjord_surface.width + c)
        expected = sum(1. / (dist[pr * fjord_surface.width + pc] + 1.) for pr, pc in port_cells)
        assert abs(market_access(parish, ports, -1., fjord_surface) - expected) < 1e-9


def test_matrix_path_equals_single_parish_path(fjord_surface):
    rng = np.random.default_rng(1)
    land_cells = np.argwhere(fjord_surface.cells == 1)
    chosen = land_cells[rng.choice(len(land_cells), size=8, replace=False)]
    height = fjord_surface.height
    parishes = [ParishSite(f'p{i}', (c + 0.5, height - r - 0.5)) for i, (r, c) in enumerate(chosen)]
    ports = [Port('sea_w', (0.5, 25.5)), Port('sea_n', (20.5, 29.5)),
             Port('fjord', (20.5, 12.5), in_baseline=False)]
    frame = compute_market_access(parishes, ports, -1., fjord_surface, n_jobs=2)
    for parish, (_, row) in zip(parishes, frame.iterrows()):
        record = delta_log_ma(parish, ports, -1., fjord_surface)
        assert row['parish_id'] == parish.id
        assert_allclose([row['ma_before'], row['ma_after'], row['delta_log_ma']],
                        [record.ma_before, record.ma_after, record.delta_log_ma], rtol=1e-12)
    assert (frame['delta_log_ma'] >= 0).all()
    assert (frame['ma_after'] >= frame['ma_before']).all()


def test_surface_after_is_used_for_counterfactual_ports(fjord_surface):
    blocked = fjord_surface.cells == 0
    blocked[:, :] = False
    blocked[16:19, 3:6] = True  # closes the western mouth of the fjord
    closed = fjord_surface.with_cells(blocked, 1)
    parish = ParishSite('p', (20.5, 11.5))
    ports = [Port('sea', (0.5, 12.5)), Port('fjord', (20.5, 12.5), in_baseline=False)]
    frame = compute_market_access([parish], ports, -1., closed, surface_after=fjord_surface)
    record = delta_log_ma(parish, ports, -1., closed, surface_after=fjord_surface)
    assert_allclose(frame.loc[0, 'delta_log_ma'], record.delta_log_ma, rtol=1e-12)
    assert record.ma_after > market_access(parish, ports, -1., closed)


def test_unreachable_parish_is_flagged_and_excluded(caplog):
    cells = np.zeros((3, 6), dtype=int)
    cells[:, 2] = NODATA
    surface = CostSurface(cells=cells, cell_size=1., alpha=10)
    cut_off = ParishSite('cut', (4.5, 1.5))
    connected = ParishSite('ok', (0.5, 1.5))
    ports = [Port('h', (1.5, 1.5))]
    with pytest.raises(UnreachableParishError):
        market_access(cut_off, ports, -1., surface)
    with caplog.at_level(logging.WARNING):
        frame = compute_market_access([cut_off, connected], ports, -1., surface)
    assert list(frame['parish_id']) == ['ok']
    assert frame.attrs['excluded'] == ['cut']
    assert 'cut' in caplog.text


@pytest.mark.parametrize('ports, theta', [
    ([], -1.),
    ([Port('a', (0.5, 0.5))], 0.),
    ([Port('a', (0.5, 0.5))], 1.),
])
def test_invalid_arguments(water_row, ports, theta):
    with pytest.raises(ValueError):
        market_access(ParishSite('p', at_col(0)), ports, theta, water_row)


def test_baseline_must_be_subset(water_row):
    ports = [Port('a', at_col(1), in_baseline=True, in_counterfactual=False), Port('b', at_col(2))]
    with pytest.raises(ValueError):
        delta_log_ma(ParishSite('p', at_col(0)), ports, -1., water_row)


def test_adding_a_port_strictly_increases_ma(water_row):
    parish = ParishSite('p', at_col(0))
    ports = [Port('a', at_col(4))]
    base = market_access(parish, ports, -1., water_row)
    for col in range(5):
        assert market_access(parish, ports + [Port('x', at_col(col))], -1., water_row) > base


def test_ma_bounds_and_monotone_in_theta():
    rng = np.random.default_rng(2)
    distances = rng.uniform(0, 50, size=(30, 6))
    distances[rng.random((30, 6)) < 0.1] = np.inf
    previous = None
    for theta in (-1., -2., -4., -8., -16.):
        ma = market_access_from_distances(distances, theta)
        assert (ma <= 6).all() and (ma >= 0).all()
        if previous is not None:
            assert (ma <= previous).all()
        previous = ma


def test_delta_log_ma_invariant_to_rescaling():
    rng = np.random.default_rng(3)
    before = rng.uniform(0.1, 1., 20)
    after = before + rng.uniform(0., 1., 20)
    delta = np.log(after) - np.log(before)
    assert_allclose(np.log(7.3 * after) - np.log(7.3 * before), delta, rtol=1e-12)


def test_port_distance_matrix_unplaceable_port():
    surface = CostSurface.from_array(np.ones((3, 3)), alpha=10)
    frame = port_distance_matrix([ParishSite('p', (0.5, 0.5))], [Port('h', (1.5, 1.5))], surface)
    assert np.isinf(frame.loc['p', 'h'])


def test_standardize():
    values = pd.Series([0.1, 0.3, 0.0, 0.7], name='delta_log_ma')
    out = standardize(values)
    assert abs(out.mean()) < 1e-12
    assert abs(out.std(ddof=0) - 1.) < 1e-12
    assert out.name == 'delta_log_ma'
    with pytest.raises(ValueError):
        standardize(np.ones(3))


def test_eligible_ports():
    toll = pd.DataFrame({'port_id': ['a', 'a', 'b', 'c', 'c', 'c'],
                         'year': [1800, 1801, 1800, 1800, 1801, 1802],
                         'passages': [1, 3, 5, 0, 2, 0]})
    assert eligible_ports(toll) == {'a'}
    assert eligible_ports(toll, min_observations=1) == {'a', 'b', 'c'}


def test_load_registries(tmp_path):
    ports_csv = tmp_path / 'ports.csv'
    ports_csv.write_text('# config_hash=abc seed=1\nid,lon,lat,in_baseline,in_counterfactual\n'
                         'h1,9.1,57.0,1,1\nh2,9.3,56.9,0,true\n')
    parishes_csv = tmp_path / 'parishes.csv'
    parishes_csv.write_text('id,x,y,region\n001,1.5,2.5,west\n002,3.5,0.5,\n')
    ports = load_ports(ports_csv)
    assert ports[1] == Port('h2', (9.3, 56.9), in_baseline=False, in_counterfactual=True)
    parishes = load_parishes(parishes_csv)
    assert parishes[0] == ParishSite('001', (1.5, 2.5), region='west')
    assert parishes[1].region is None

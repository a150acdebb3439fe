import numpy as np
import pandas as pd
import pytest

from firstnature.estimators.event_study import EventStudySpec, twfe_event_study
from firstnature.estimators.ppml import ppml
from firstnature.estimators.reporting import (COEFFICIENT_COLUMNS, ape_share, coefficients_table,
                                              percent_from_logpoints, treated_means)
from firstnature.tests.utils import simulate_event_panel


@pytest.mark.parametrize('beta, percent', [(.2364, 26.67), (0., 0.), (-.1054, -10.0)])
def test_percent_from_logpoints(beta, percent):
    assert percent_from_logpoints(beta) == pytest.approx(percent, abs=.01)


def test_percent_from_logpoints_arrays():
    np.testing.assert_allclose(percent_from_logpoints(np.array([0., np.log(2.)])), [0., 100.])


@pytest.mark.parametrize('beta, occ, pop, share', [(0., 100., 500., 0.), (.5, 100., 500., .1), (-.2, 30., 300., -.02)])
def test_ape_share(beta, occ, pop, share):
    assert ape_share(beta, occ, pop) == pytest.approx(share)


def test_ape_share_validation():
    with pytest.raises(ValueError):
        ape_share(.5, 100., 0.)
    with pytest.raises(ValueError):
        ape_share(.5, -1., 10.)


def test_treated_means():
    panel = pd.DataFrame({'year': [1901, 1901, 1901, 1801], 'treatment_dummy': [1, 1, 0, 1],
                          'population': [100., 300., 5., 7.]})
    assert treated_means(panel, 'population') == 200.
    with pytest.raises(ValueError):
        treated_means(panel, 'population', year=1850)


def test_coefficients_table():
    panel = simulate_event_panel(0, n_parishes=30, n_treated=10, effects={1901: .2})
    event = twfe_event_study(panel, EventStudySpec(outcome='log_population', transform='identity'))
    poisson = ppml(panel, 'population', ['treatment_dummy'], cluster='parish_id')
    table = coefficients_table({'pop_dummy': event, 'pop_ppml': poisson})
    assert list(table.columns) == COEFFICIENT_COLUMNS
    assert (table['spec_id'] == 'pop_dummy').sum() == 8
    assert 'year_1801_x_treated' not in set(table['term'])
    ppml_rows = table.loc[table['spec_id'] == 'pop_ppml']
    assert ppml_rows['term'].tolist() == ['intercept', 'treatment_dummy']
    assert (ppml_rows['p_bonferroni'] == ppml_rows['p']).all()
    assert (ppml_rows['n_clusters'] == 30).all()
    assert coefficients_table({}).empty

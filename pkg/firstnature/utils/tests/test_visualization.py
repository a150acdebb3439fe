import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import pytest  # noqa: E402

from firstnature.estimators.event_study import EventStudySpec, twfe_event_study  # noqa: E402
from firstnature.tests.utils import simulate_event_panel  # noqa: E402
from firstnature.utils.visualization import plot_event_study, plot_propensity_balance, save_svg  # noqa: E402


@pytest.fixture(scope='module')
def fit():
    panel = simulate_event_panel(0, n_parishes=40, n_treated=10, effects={1901: .25})
    return twfe_event_study(panel, EventStudySpec(outcome='population'))


@pytest.mark.parametrize('bonferroni', [False, True])
def test_plot_event_study(fit, bonferroni):
    ax = plot_event_study(fit, bonferroni=bonferroni)
    assert len(ax.containers) == 1
    _, caps, (bars, ) = ax.containers[0]
    segments = bars.get_segments()
    table = fit.to_frame(bonferroni=bonferroni)
    assert len(segments) == len(table)
    np.testing.assert_allclose([s[1][1] - s[0][1] for s in segments], table['ci_upper'] - table['ci_lower'])
    plt.close(ax.figure)


def test_bonferroni_intervals_are_wider(fit):
    plain = fit.to_frame()
    corrected = fit.to_frame(bonferroni=True)
    keep = ~plain['reference']
    assert ((corrected['ci_upper'] - corrected['ci_lower'])[keep] > (plain['ci_upper'] - plain['ci_lower'])[keep]).all()


def test_plot_propensity_balance():
    scores = pd.Series({'t0': .8, 't1': .6, 'c0': .2, 'c1': .55, 'c2': .75})
    axes = plot_propensity_balance(scores, ['t0', 't1'], ['c0', 'c1', 'c2'], matched_ids=['t0', 't1', 'c2', 'c1'])
    assert [a.get_title() for a in axes] == ['before', 'after']
    heights = [sum(p.get_height() for p in a.patches) for a in axes]
    assert heights == [5, 4]
    plt.close(axes[0].figure)
    with pytest.raises(ValueError):
        _, ax = plt.subplots()
        plot_propensity_balance(scores, ['t0'], ['c0'], matched_ids=['t0', 'c0'], ax=ax)
    plt.close('all')


def test_svg_is_reproducible(fit, tmp_path):
    paths = [tmp_path / 'a.svg', tmp_path / 'b.svg']
    for path in paths:
        ax = plot_event_study(fit)
        save_svg(ax.figure, path)
        plt.close(ax.figure)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert b'<svg' in paths[0].read_bytes()

import numpy as np
import pandas as pd
import pytest

from firstnature.archaeology.activity import ActivityPanel, year_grid

N_SAMPLES = 100
DECLINE = -.01


@pytest.fixture(scope='module')
def declining_panel():
    """
    Activity panel whose probabilities are exactly additive in parish and year effects with a decline of one
    percentage point in treated parishes after 1200. Every cell holds exactly `p * N_SAMPLES` successes, spread
    over the replicates at random.
    """
    rng = np.random.default_rng(0)
    years = year_grid()
    n_parishes, n_treated = 40, 10
    parish_effect = rng.integers(20, 50, size=n_parishes) / 100
    year_effect = np.arange(len(years)) / 100
    treated = np.arange(n_parishes) < n_treated
    probability = parish_effect[:, None] + year_effect[None, :] + DECLINE * np.outer(treated, years > 1200)
    counts = np.rint(probability * N_SAMPLES).astype(int)
    ordered = np.arange(N_SAMPLES)[:, None, None] < counts[None]
    replicates = rng.permuted(ordered, axis=0)
    ids = [f'p{i:02d}' for i in range(n_parishes)]
    panel = ActivityPanel(parish_ids=ids, years=years, replicates=replicates)
    treatments = pd.DataFrame({'parish_id': ids,
                               'treatment_dummy': treated.astype(int),
                               'delta_log_ma': np.where(treated, -.1, 0.)})
    return panel, treatments

"""
Static plots of event study coefficients and propensity score balance, rendered reproducibly to SVG.
"""
import logging
import os
from typing import Optional, Union

import matplotlib
import numpy as np
import pandas as pd

from firstnature.estimators.event_study import EventStudyFit

logger = logging.getLogger(__name__)

# fixed id salt and no creation date so that identical figures serialize to identical bytes
SVG_RC = {'svg.hashsalt': 'firstnature', 'svg.fonttype': 'none'}


def plot_event_study(fit: EventStudyFit,
                     ax: Optional['matplotlib.axes.Axes'] = None,
                     bonferroni: bool = False,
                     level: float = 0.05,
                     errorbar_kw: Optional[dict] = None,
                     fig_kw: Optional[dict] = None) -> 'matplotlib.axes.Axes':
    """
    Plot event study coefficients with confidence intervals, one series per treatment.

    Parameters
    ----------
    fit
        An `EventStudyFit` produced by :py:func:`firstnature.estimators.twfe_event_study` or the archaeology
        event studies.
    ax
        A `matplotlib` axes object to plot on.
    bonferroni
        Whether to draw Bonferroni corrected intervals.
    level
        Intervals cover ``1 - level``.
    errorbar_kw
        Keyword arguments passed to the `ax.errorbar` function.
    fig_kw
        Keyword arguments passed to the `fig.set` function.

    Returns
    -------
    The axes holding the plot.
    """
    import matplotlib.pyplot as plt

    default_errorbar_kw = {'fmt': 'o', 'markersize': 4, 'capsize': 3}
    errorbar_kw = {**default_errorbar_kw, **(errorbar_kw or {})}
    default_fig_kw = {'tight_layout': 'tight'}
    fig_kw = {**default_fig_kw, **(fig_kw or {})}

    if ax is None:
        _, ax = plt.subplots()
    table = fit.to_frame(level=level, bonferroni=bonferroni)
    treatments = list(fit.data['treatments'])
    # dodge the series so that intervals do not overlap
    years = np.asarray(fit.data['event_years'], dtype=float)
    step = np.min(np.diff(years)) if len(years) > 1 else 1.
    offsets = (np.arange(len(treatments)) - (len(treatments) - 1) / 2) * step * 0.15

    for treatment, offset in zip(treatments, offsets):
        rows = table.loc[table['treatment'] == treatment]
        estimate = rows['estimate'].to_numpy()
        yerr = np.vstack([estimate - rows['ci_lower'].to_numpy(), rows['ci_upper'].to_numpy() - estimate])
        ax.errorbar(rows['event_year'].to_numpy() + offset, estimate, yerr=yerr, label=treatment, **errorbar_kw)

    ax.axhline(0, color='grey', linewidth=0.8, linestyle='--')
    ax.axvline(fit.data['reference_year'], color='grey', linewidth=0.8, linestyle=':')
    ax.set_xlabel('year')
    ax.set_ylabel('coefficient')
    ax.set_xticks(years)
    if len(treatments) > 1:
        ax.legend()
    ax.figure.set(**fig_kw)
    return ax


def plot_propensity_balance(scores: Union[pd.Series, dict],
                            treated_ids,
                            control_ids,
                            matched_ids=None,
                            bins: int = 20,
                            ax: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Histograms of the propensity scores of treated and control parishes before and, if `matched_ids` is given,
    after matching.

    Parameters
    ----------
    scores
        Propensity per parish id.
    treated_ids, control_ids
        Parishes of the unmatched sample.
    matched_ids
        Parishes of the matched sample, see :py:func:`firstnature.matching.matched_sample`.
    bins
        Number of histogram bins on [0, 1].
    ax
        Array of `matplotlib` axes, one per panel.

    Returns
    -------
    Array of axes, ``before`` first.
    """
    import matplotlib.pyplot as plt

    scores = pd.Series(scores)
    scores.index = scores.index.astype(str)
    treated = {str(t) for t in treated_ids}
    samples = {'before': [str(i) for i in list(treated_ids) + list(control_ids)]}
    if matched_ids is not None:
        samples['after'] = [str(i) for i in matched_ids]

    if ax is None:
        _, ax = plt.subplots(1, len(samples), sharey=True, squeeze=False)
    axes = np.asarray(ax).ravel()
    if axes.size < len(samples):
        raise ValueError(f"Expected ax to have {len(samples)} axes, got {axes.size}")

    edges = np.linspace(0, 1, bins + 1)
    for axis, (name, ids) in zip(axes, samples.items()):
        values = scores.loc[ids]
        is_treated = np.array([i in treated for i in ids])
        axis.hist(values[is_treated].to_numpy(), bins=edges, alpha=0.6, label='treated')
        axis.hist(values[~is_treated].to_numpy(), bins=edges, alpha=0.6, label='control')
        axis.set_title(name)
        axis.set_xlabel('propensity score')
    axes[0].set_ylabel('parishes')
    axes[0].legend()
    return axes


def save_svg(figure: 'matplotlib.figure.Figure', path: Union[str, os.PathLike]) -> None:
    """
    Write `figure` as SVG with deterministic element ids and no date metadata.
    """
    with matplotlib.rc_context(SVG_RC):
        figure.savefig(path, format='svg', metadata={'Date': None})
    logger.debug('Wrote %s', path)

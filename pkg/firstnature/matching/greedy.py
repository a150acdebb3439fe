"""
Greedy one-to-one propensity score matching without replacement.
"""
import copy
import logging
import os
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from firstnature.api.defaults import DEFAULT_DATA_MATCH, DEFAULT_META_MATCH
from firstnature.api.interfaces import Result
from firstnature.exceptions import DataError

logger = logging.getLogger(__name__)

MATCH_COLUMNS = ['treated_id', 'control_id', 'score_t', 'score_c']

BALANCE_COLUMNS = ['n_treated', 'n_control', 'mean_treated', 'mean_control', 'sd_treated', 'sd_control', 'smd',
                   'mean_abs_delta']


class MatchResult(Result):
    """
    Matched pairs in the order they were formed, the treated parishes left without a control and the absolute
    propensity difference of every pair.
    """

    def to_frame(self) -> pd.DataFrame:
        pairs = list(self.data['pairs'])
        return pd.DataFrame({'treated_id': [t for t, _ in pairs],
                             'control_id': [c for _, c in pairs],
                             'score_t': np.asarray(self.data['score_treated'], dtype=float),
                             'score_c': np.asarray(self.data['score_control'], dtype=float)},
                            columns=MATCH_COLUMNS)

    def write_csv(self, path: Union[str, os.PathLike], header: Optional[str] = None) -> None:
        with open(path, 'w') as f:
            if header:
                f.write(header.rstrip('\n') + '\n')
            self.to_frame().to_csv(f, index=False)


def matching_pools(treated: pd.Series,
                   regions: Optional[Mapping[str, Optional[str]]] = None,
                   include_limfjord_controls: bool = False) -> Tuple[List[str], List[str]]:
    """
    Treated and candidate control parishes. Untreated parishes of the middle and east Limfjord are no
    controls unless `include_limfjord_controls`.

    Parameters
    ----------
    treated
        Treatment indicator indexed by parish id.
    regions
        Parish id -> Limfjord region ('west', 'middle', 'east' or None).
    include_limfjord_controls
        Whether untreated Limfjord parishes may serve as controls.
    """
    treated = treated.astype(int)
    treated_ids = sorted(str(i) for i in treated.index[treated == 1])
    controls = [str(i) for i in treated.index[treated == 0]]
    if regions is not None and not include_limfjord_controls:
        excluded = [c for c in controls if regions.get(c) in ('west', 'middle', 'east')]
        if excluded:
            logger.info('Excluding %d Limfjord parishes from the control pool', len(excluded))
        controls = [c for c in controls if c not in set(excluded)]
    return treated_ids, sorted(controls)


def greedy_match(scores: Union[pd.Series, Mapping[str, float]],
                 treated_ids: Sequence,
                 control_ids: Sequence,
                 seed: int = 0) -> MatchResult:
    """
    Visit the treated parishes in a seeded random order; each takes the remaining control with the closest
    propensity, ties going to the smaller control id.

    Parameters
    ----------
    scores
        Propensity per parish id.
    treated_ids, control_ids
        Disjoint sets of parish ids.
    seed
        Seeds the visiting order.

    Returns
    -------
    The matching. Treated parishes visited after the controls ran out are reported unmatched.
    """
    scores = pd.Series(scores)
    scores.index = scores.index.astype(str)
    treated_ids = sorted(str(t) for t in treated_ids)
    control_ids = sorted(str(c) for c in control_ids)
    if set(treated_ids) & set(control_ids):
        raise DataError('A parish cannot be both treated and control')
    missing = [i for i in treated_ids + control_ids if i not in scores.index]
    if missing:
        raise DataError(f"No propensity score for parishes {missing[:5]}")
    if len(control_ids) < len(treated_ids):
        logger.warning('%d treated parishes but only %d controls', len(treated_ids), len(control_ids))

    rng = np.random.default_rng(seed)
    order = [treated_ids[i] for i in rng.permutation(len(treated_ids))]
    control_scores = scores.loc[control_ids].to_numpy(dtype=float)
    available = np.ones(len(control_ids), dtype=bool)
    pairs, unmatched, score_t, score_c = [], [], [], []
    for t in order:
        if not available.any():
            unmatched.append(t)
            continue
        delta = np.where(available, np.abs(control_scores - scores[t]), np.inf)
        # argmin returns the first minimum, i.e. the smallest id
        j = int(np.argmin(delta))
        available[j] = False
        pairs.append((t, control_ids[j]))
        score_t.append(float(scores[t]))
        score_c.append(float(control_scores[j]))
    if unmatched:
        logger.warning('%d treated parishes were left unmatched', len(unmatched))

    meta = copy.deepcopy(DEFAULT_META_MATCH)
    meta['name'] = 'GreedyMatch'
    meta['params'].update(seed=seed, n_treated=len(treated_ids), n_controls=len(control_ids))
    data = copy.deepcopy(DEFAULT_DATA_MATCH)
    data.update(pairs=pairs,
                unmatched=unmatched,
                deltas=np.abs(np.array(score_t) - np.array(score_c)),
                order=order,
                score_treated=np.array(score_t),
                score_control=np.array(score_c))
    return MatchResult(meta=meta, data=data)


def matched_sample(match: MatchResult) -> List[str]:
    """
    Parish ids of the matched sample, treated parishes followed by their controls.
    """
    pairs = list(match.data['pairs'])
    return [t for t, _ in pairs] + [c for _, c in pairs]


def _summary(treated: np.ndarray, control: np.ndarray, mean_abs_delta: float) -> dict:
    sd_t = float(treated.std(ddof=1)) if len(treated) > 1 else 0.
    sd_c = float(control.std(ddof=1)) if len(control) > 1 else 0.
    diff = float(treated.mean() - control.mean()) if len(treated) and len(control) else np.nan
    pooled = np.sqrt((sd_t ** 2 + sd_c ** 2) / 2)
    smd = diff / pooled if pooled > 0 else (0. if diff == 0 else np.sign(diff) * np.inf)
    return {'n_treated': len(treated), 'n_control': len(control),
            'mean_treated': float(treated.mean()) if len(treated) else np.nan,
            'mean_control': float(control.mean()) if len(control) else np.nan,
            'sd_treated': sd_t, 'sd_control': sd_c, 'smd': smd, 'mean_abs_delta': mean_abs_delta}


def balance_report(match: MatchResult,
                   scores: Union[pd.Series, Mapping[str, float]],
                   treated_ids: Sequence,
                   control_ids: Sequence) -> pd.DataFrame:
    """
    Propensity score distributions before and after matching.

    Returns
    -------
    Frame indexed by ``'before'`` and ``'after'`` with group sizes, means and standard deviations, the standardized
    mean difference and the mean absolute score difference (over all treated-control pairs before matching,
    over the matched pairs after).
    """
    scores = pd.Series(scores)
    scores.index = scores.index.astype(str)
    treated = scores.loc[[str(t) for t in treated_ids]].to_numpy(dtype=float)
    control = scores.loc[[str(c) for c in control_ids]].to_numpy(dtype=float)
    all_pairs = float(np.abs(treated[:, None] - control[None, :]).mean()) if len(treated) and len(control) else np.nan
    deltas = np.asarray(match.data['deltas'], dtype=float)
    rows = {'before': _summary(treated, control, all_pairs),
            'after': _summary(np.asarray(match.data['score_treated'], dtype=float),
                              np.asarray(match.data['score_control'], dtype=float),
                              float(deltas.mean()) if len(deltas) else np.nan)}
    return pd.DataFrame.from_dict(rows, orient='index')[BALANCE_COLUMNS]


def load_matches(path: Union[str, os.PathLike]) -> pd.DataFrame:
    frame = pd.read_csv(path, comment='#', dtype={'treated_id': str, 'control_id': str})
    missing = set(MATCH_COLUMNS) - set(frame.columns)
    if missing:
        raise DataError(f"{path} is missing columns {sorted(missing)}")
    return frame

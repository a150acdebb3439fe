"""
Brute-force reference implementations used by the test-suite to check the fast code paths.
"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd


def grid_edge_list(cells: np.ndarray, alpha: float, cell_size: float = 1.) -> List[Tuple[int, int, float]]:
    """
    Explicit edge list of the 8-connected grid, both directions, built cell by cell.
    Classes: 0 water, 1 land, 2 forced land, -1 impassable.
    """
    height, width = cells.shape
    edges = []
    for r in range(height):
        for c in range(width):
            if cells[r, c] == -1:
                continue
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == 0 and dc == 0:
                        continue
                    rr, cc = r + dr, c + dc
                    if not (0 <= rr < height and 0 <= cc < width) or cells[rr, cc] == -1:
                        continue
                    cost_a = 1. if cells[r, c] == 0 else alpha
                    cost_b = 1. if cells[rr, cc] == 0 else alpha
                    step = cell_size * (np.sqrt(2.) if dr != 0 and dc != 0 else 1.)
                    edges.append((r * width + c, rr * width + cc, step * min(cost_a, cost_b)))
    return edges


def bellman_ford(n_nodes: int, edges: Sequence[Tuple[int, int, float]], source: int) -> np.ndarray:
    """
    Bellman-Ford relaxation over an explicit edge list, stopping once no distance changes.
    """
    src = np.array([e[0] for e in edges], dtype=int)
    dst = np.array([e[1] for e in edges], dtype=int)
    w = np.array([e[2] for e in edges], dtype=float)
    dist = np.full(n_nodes, np.inf)
    dist[source] = 0.
    for _ in range(n_nodes):
        candidate = dist.copy()
        np.minimum.at(candidate, dst, dist[src] + w)
        if np.array_equal(candidate, dist):
            break
        dist = candidate
    return dist


def dummy_ols(frame: pd.DataFrame, outcome: str, unit: str, time: str, regressors: Sequence[str]) -> np.ndarray:
    """
    OLS with explicit unit and time dummies. Returns the coefficients on `regressors`.
    """
    units = sorted(frame[unit].unique())
    times = sorted(frame[time].unique())
    columns = [frame[list(regressors)].to_numpy(dtype=float)]
    columns.append(np.column_stack([(frame[unit] == u).to_numpy(dtype=float) for u in units]))
    columns.append(np.column_stack([(frame[time] == t).to_numpy(dtype=float) for t in times[1:]]))
    X = np.hstack(columns)
    beta, *_ = np.linalg.lstsq(X, frame[outcome].to_numpy(dtype=float), rcond=None)
    return beta[:len(regressors)]


def naive_cluster_sandwich(X: np.ndarray, y: np.ndarray, clusters: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Textbook CR1 sandwich written with explicit matrices and a loop over clusters.
    Returns (coefficients, covariance).
    """
    n, k = X.shape
    XtX_inv = np.linalg.inv(X.T @ X)
    beta = XtX_inv @ X.T @ y
    u = y - X @ beta
    groups = np.unique(clusters)
    g = len(groups)
    meat = np.zeros((k, k))
    for group in groups:
        idx = clusters == group
        score = X[idx].T @ u[idx]
        meat += np.outer(score, score)
    factor = g / (g - 1) * (n - 1) / (n - k)
    return beta, factor * XtX_inv @ meat @ XtX_inv


def pairwise_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """
    Ranking AUC by counting every (positive, negative) pair, ties counting one half.
    """
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.
    for p in pos:
        for q in neg:
            wins += 1. if p > q else 0.5 if p == q else 0.
    return wins / (len(pos) * len(neg))


def greedy_replay(scores: dict, treated: Sequence, controls: Sequence, order: Sequence) -> List[Tuple]:
    """
    Step-by-step greedy matching for a given visiting order: each treated unit takes the closest
    remaining control, ties to the smaller id.
    """
    available = sorted(controls)
    pairs = []
    for t in order:
        if not available:
            break
        best = None
        for c in available:
            delta = abs(scores[t] - scores[c])
            if best is None or delta < best[0]:
                best = (delta, c)
        pairs.append((t, best[1]))
        available.remove(best[1])
    return pairs


def simulate_event_panel(seed: int,
                         n_parishes: int = 200,
                         n_treated: int = 40,
                         years: Sequence[int] = (1787, 1801, 1834, 1840, 1845, 1850, 1860, 1880, 1901),
                         effects: Optional[Dict[int, float]] = None,
                         sigma: float = 0.05) -> pd.DataFrame:
    """
    Parish x year panel `log_population = a_i + a_t + effect_t * treated_i + noise`. The first `n_treated`
    parishes are treated (west); `delta_log_ma` is positive for them and zero otherwise.
    """
    rng = np.random.default_rng(seed)
    effects = {} if effects is None else effects
    parish_fe = rng.normal(7., .5, n_parishes)
    year_fe = rng.normal(0., .1, len(years))
    treated = np.arange(n_parishes) < n_treated
    delta = np.where(treated, rng.uniform(.1, .3, n_parishes), 0.)
    rows = []
    for i in range(n_parishes):
        for j, year in enumerate(years):
            y = parish_fe[i] + year_fe[j] + effects.get(year, 0.) * treated[i] + sigma * rng.standard_normal()
            rows.append({'parish_id': f'p{i:03d}',
                         'year': year,
                         'log_population': y,
                         'population': np.exp(y),
                         'treatment_dummy': int(treated[i]),
                         'region': 'west' if treated[i] else 'reference',
                         'delta_log_ma': delta[i]})
    return pd.DataFrame(rows)

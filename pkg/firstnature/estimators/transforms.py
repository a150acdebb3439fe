"""
Outcome transformations for count outcomes with zeros.
"""
from typing import NamedTuple

import numpy as np

TRANSFORMS = ('log', 'log1p', 'arcsinh', 'extensive', 'intensive', 'identity')


class TransformedOutcome(NamedTuple):
    values: np.ndarray
    """
    Transformed outcome, `nan` where `mask` is False.
    """
    mask: np.ndarray
    """
    Observations entering the regression.
    """


def transform_outcome(values: np.ndarray, kind: str) -> TransformedOutcome:
    """
    Transform an outcome.

    Parameters
    ----------
    values
        Outcome values, nonnegative for every transform but 'identity'.
    kind
        One of

         - ``'log'`` - `log(y)`, requires strictly positive values.

         - ``'log1p'`` - `log(y + 1)`.

         - ``'arcsinh'`` - `log(y + sqrt(y ** 2 + 1))`.

         - ``'extensive'`` - `1[y > 0]`.

         - ``'intensive'`` - `log(y)` on the `y > 0` subsample; zeros are masked out.

         - ``'identity'`` - `y`.

    Returns
    -------
    Transformed values and the inclusion mask. Missing input values are always masked out.
    """
    if kind not in TRANSFORMS:
        raise ValueError(f"Unknown transform '{kind}'. Accepted values are {TRANSFORMS}")
    y = np.asarray(values, dtype=float)
    observed = ~np.isnan(y)
    if kind != 'identity' and (y[observed] < 0).any():
        raise ValueError(f"The '{kind}' transform requires nonnegative values")

    mask = observed.copy()
    out = np.full_like(y, np.nan)
    if kind == 'log':
        if (y[observed] == 0).any():
            raise ValueError("Zero outcomes cannot be logged; use 'intensive', 'log1p' or 'arcsinh'")
        out[mask] = np.log(y[mask])
    elif kind == 'log1p':
        out[mask] = np.log1p(y[mask])
    elif kind == 'arcsinh':
        out[mask] = np.arcsinh(y[mask])
    elif kind == 'extensive':
        out[mask] = (y[mask] > 0).astype(float)
    elif kind == 'intensive':
        mask &= y > 0
        out[mask] = np.log(y[mask])
    else:
        out[mask] = y[mask]
    return TransformedOutcome(values=out, mask=mask)

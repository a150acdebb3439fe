"""
Dating distributions of archaeological findings. Archaeologists date a finding to an interval of years; the
interval is read either as a uniform distribution over its integer years or as the 95% interval of a normal
distribution.
"""
import logging
from functools import lru_cache
from typing import Tuple, Union

import attr
import numpy as np
from scipy.stats import norm

logger = logging.getLogger(__name__)

DATING_MODELS = ('uniform', 'normal')

FINDING_KINDS = ('coin', 'building')

PERIOD = (750, 1500)

# half width of a 95% normal interval in standard deviations
NORMAL_INTERVAL_Z = 1.96

# the discretized normal is supported on mu +- NORMAL_SUPPORT_SD * sigma
NORMAL_SUPPORT_SD = 8.


def _check_model(instance, attribute, value):
    if value not in DATING_MODELS:
        raise ValueError(f"Unknown dating model '{value}'. Accepted values are {DATING_MODELS}")


def _check_kind(instance, attribute, value):
    if value not in FINDING_KINDS:
        raise ValueError(f"Unknown finding kind '{value}'. Accepted values are {FINDING_KINDS}")


@attr.s(frozen=True)
class FindingRecord:
    """
    An interval-dated finding resolved to a parish.
    """
    finding_id = attr.ib(converter=str)  # type: str
    parish_id = attr.ib(converter=str)  # type: str
    kind = attr.ib(validator=_check_kind)  # type: str
    y_min = attr.ib(converter=int)  # type: int
    y_max = attr.ib(converter=int)  # type: int
    dating_model = attr.ib(default='uniform', validator=_check_model)  # type: str

    def __attrs_post_init__(self):
        if self.y_min > self.y_max:
            raise ValueError(f"Finding {self.finding_id} is dated to [{self.y_min}, {self.y_max}]")

    @property
    def span(self) -> int:
        return self.y_max - self.y_min + 1


@lru_cache(maxsize=4096)
def _distribution(y_min: int, y_max: int, model: str) -> Tuple[np.ndarray, np.ndarray]:
    if model == 'uniform' or y_min == y_max:
        years = np.arange(y_min, y_max + 1)
        return years, np.full(len(years), 1. / len(years))

    mu = (y_min + y_max) / 2
    sigma = (y_max - y_min) / (2 * NORMAL_INTERVAL_Z)
    years = np.arange(int(np.floor(mu - NORMAL_SUPPORT_SD * sigma)), int(np.ceil(mu + NORMAL_SUPPORT_SD * sigma)) + 1)
    # mass of the unit interval centred on every year
    mass = norm.cdf((years + .5 - mu) / sigma) - norm.cdf((years - .5 - mu) / sigma)
    return years, mass / mass.sum()


def dating_distribution(finding: FindingRecord) -> Tuple[np.ndarray, np.ndarray]:
    """
    Support and probabilities of the year in which a finding was generated.

    Parameters
    ----------
    finding
        The finding.

    Returns
    -------
    years
        Consecutive integer years.
    probabilities
        Probability of every year, summing to 1.
    """
    years, probabilities = _distribution(finding.y_min, finding.y_max, finding.dating_model)
    return years.copy(), probabilities.copy()


def dating_probability(finding: FindingRecord, t: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Probability that `finding` was generated in year `t`. Uniform datings put ``1 / span`` on every year of the
    inclusive interval; normal datings centre a normal distribution on the midpoint with the interval as its
    95% range, discretized to integer years. A point dating puts all mass on its year.
    """
    years, probabilities = _distribution(finding.y_min, finding.y_max, finding.dating_model)
    t_arr = np.asarray(t)
    idx = t_arr - years[0]
    inside = (idx >= 0) & (idx < len(years))
    out = np.where(inside, probabilities[np.clip(idx, 0, len(years) - 1)], 0.)
    return float(out) if np.ndim(t) == 0 else out


def window_probability(finding: FindingRecord, centre: Union[int, np.ndarray], halfwidth: int) -> np.ndarray:
    """
    Probability that `finding` was generated in the window ``[centre - halfwidth, centre + halfwidth)``. The
    windows of a grid spaced ``2 * halfwidth`` apart partition the years.
    """
    years, probabilities = _distribution(finding.y_min, finding.y_max, finding.dating_model)
    cdf = np.concatenate([[0.], np.cumsum(probabilities)])
    centre = np.asarray(centre)
    lo = np.clip(centre - halfwidth - years[0], 0, len(years))
    hi = np.clip(centre + halfwidth - years[0], 0, len(years))
    return np.clip(cdf[hi] - cdf[lo], 0., 1.)

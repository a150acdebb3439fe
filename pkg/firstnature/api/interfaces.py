import abc
import json
import logging
import os
import pprint
from collections import ChainMap
from functools import partial
from typing import Union

import attr
import numpy as np
import pandas as pd
from scipy.stats import norm

from firstnature.saving import save_model
from firstnature.version import __version__

logger = logging.getLogger(__name__)


# default metadata
def default_meta() -> dict:
    return {
        "name": None,
        "type": [],
        "params": {},
        "version": None,
    }


# keys in insertion order
firstnature_pformat = partial(pprint.pformat, sort_dicts=False)


class NumpyEncoder(json.JSONEncoder):
    """
    JSON encoder that understands numpy scalars and arrays as well as pandas frames.
    """

    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return float(obj)
        elif isinstance(obj, np.bool_):
            return bool(obj)
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        elif isinstance(obj, pd.DataFrame):
            return obj.to_dict(orient='list')
        elif isinstance(obj, pd.Series):
            return obj.tolist()
        elif isinstance(obj, (set, frozenset)):
            return sorted(obj)
        return json.JSONEncoder.default(self, obj)


@attr.s
class Estimator(abc.ABC):
    """
    Base class for stateful algorithms. Mirrors the metadata handling of the results they produce.
    """
    meta = attr.ib(default=attr.Factory(default_meta), repr=firstnature_pformat)  # type: dict

    def __attrs_post_init__(self):
        # add a name and version to the metadata dictionary
        self.meta["name"] = self.__class__.__name__
        self.meta["version"] = __version__

        # expose keys stored in self.meta as attributes of the class.
        for key, value in self.meta.items():
            setattr(self, key, value)

    def save(self, path: Union[str, os.PathLike]) -> None:
        """
        Save a fitted model to disk. Uses the `dill` module.

        Parameters
        ----------
        path
            Path to a directory. A new directory will be created if one does not exist.
        """
        save_model(self, path)


class FitMixin(abc.ABC):
    @abc.abstractmethod
    def fit(self, *args, **kwargs) -> "Estimator":
        pass


@attr.s
class Result:
    """
    Result class returned by the estimation routines.
    """
    meta = attr.ib(repr=firstnature_pformat)  # type: dict
    data = attr.ib(repr=firstnature_pformat)  # type: dict

    def __attrs_post_init__(self):
        """
        Expose keys stored in self.meta and self.data as attributes of the class.
        """
        for key, value in ChainMap(self.meta, self.data).items():
            setattr(self, key, value)

    def to_json(self) -> str:
        """
        Serialize the result data and metadata into a json format.

        Returns
        -------
        String containing json representation of the result.
        """
        return json.dumps(attr.asdict(self), cls=NumpyEncoder)

    @classmethod
    def from_json(cls, jsonrepr) -> "Result":
        """
        Create an instance of a result class using a json representation of it. Arrays are returned as
        nested lists.

        Parameters
        ----------
        jsonrepr
            json representation of a result.

        Returns
        -------
            A result object.
        """
        dictrepr = json.loads(jsonrepr)
        try:
            meta = dictrepr['meta']
            data = dictrepr['data']
        except KeyError:
            logger.exception("Invalid result representation")
            raise
        return cls(meta=meta, data=data)


class CoefficientsResult(Result):
    """
    Result holding one coefficient per named term in `data['terms']`, with `coefficients`, `se` and `p` arrays
    aligned to it.
    """

    def _index(self, term: str) -> int:
        terms = list(self.data['terms'])
        if term not in terms:
            raise KeyError(f"Unknown term '{term}'. Terms are {terms}")
        return terms.index(term)

    def coef(self, term: str) -> float:
        return float(np.asarray(self.data['coefficients'], dtype=float)[self._index(term)])

    def std_err(self, term: str) -> float:
        return float(np.asarray(self.data['se'], dtype=float)[self._index(term)])

    def to_frame(self, level: float = 0.05) -> pd.DataFrame:
        """
        Coefficient table with normal confidence intervals at `level`.
        """
        z = float(norm.ppf(1 - level / 2))
        beta = np.asarray(self.data['coefficients'], dtype=float)
        se = np.asarray(self.data['se'], dtype=float)
        return pd.DataFrame({'term': list(self.data['terms']),
                             'estimate': beta,
                             'se': se,
                             'p': np.asarray(self.data['p'], dtype=float),
                             'ci_lower': beta - z * se,
                             'ci_upper': beta + z * se})

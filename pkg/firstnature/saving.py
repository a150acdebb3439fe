import copy
import os
import warnings
from pathlib import Path
from typing import TYPE_CHECKING, Union

import dill

if TYPE_CHECKING:
    from firstnature.api.interfaces import Estimator

from firstnature.version import __version__

# do not extend pickle dispatch table so as not to change pickle behaviour
dill.extend(use_dill=False)


def load_model(path: Union[str, os.PathLike]) -> 'Estimator':
    """
    Load a fitted model from disk.

    Parameters
    ----------
    path
        Path to a directory containing the saved model.

    Returns
    -------
    A fitted model instance.
    """
    with open(Path(path, 'meta.dill'), 'rb') as f:
        meta = dill.load(f)

    if meta['version'] != __version__:
        warnings.warn(f'Trying to load a model saved with version {meta["version"]} when using version '
                      f'{__version__}. This may lead to breaking code or invalid results.')

    with open(Path(path, 'model.dill'), 'rb') as f:
        model = dill.load(f)
    return model


def save_model(model: 'Estimator', path: Union[str, os.PathLike]) -> None:
    """
    Save a fitted model to disk. Uses the `dill` module.

    Parameters
    ----------
    model
        Model instance to save to disk.
    path
        Path to a directory. A new directory will be created if one does not exist.
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)

    meta = copy.deepcopy(model.meta)
    with open(Path(path, 'meta.dill'), 'wb') as f:
        dill.dump(meta, f)
    with open(Path(path, 'model.dill'), 'wb') as f:
        dill.dump(model, f, recurse=True)

from . import access, archaeology, datasets, estimators, geo, matching, paneldata, utils
from .version import __version__  # noqa F401

__all__ = ['access', 'archaeology', 'datasets', 'estimators', 'geo', 'matching', 'paneldata', 'utils']

"""
Run configuration of the command line: an INI file with the sections ``[paths]``, ``[parameters]`` and
``[toggles]`` whose values are overridden by command line flags.
"""
import configparser
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Union

import attr

from firstnature.access.market_access import ALPHA_GRID, DEFAULT_ALPHA, DEFAULT_THETA, THETA_GRID
from firstnature.archaeology.dating import DATING_MODELS, FINDING_KINDS
from firstnature.estimators.subgroups import SUBGROUPS
from firstnature.exceptions import ConfigError
from firstnature.utils.data import parse_list

logger = logging.getLogger(__name__)

SECTIONS = ('paths', 'parameters', 'toggles')

PROPENSITY_MODELS = ('boosting', 'logistic')


def _optional_path(value) -> Optional[str]:
    if value is None or str(value).strip() == '':
        return None
    return str(value)


def _float_list(value) -> List[float]:
    return parse_list(value, float) if isinstance(value, str) else [float(v) for v in value]


def _str_list(value) -> List[str]:
    return parse_list(value) if isinstance(value, str) else [str(v) for v in value]


def _as_bool(value) -> bool:
    if isinstance(value, str):
        flag = value.strip().lower()
        if flag not in ('1', '0', 'true', 'false', 'yes', 'no', 'on', 'off'):
            raise ValueError(f"Not a boolean: '{value}'")
        return flag in ('1', 'true', 'yes', 'on')
    return bool(value)


def _optional_int(value) -> Optional[int]:
    return None if value is None or str(value).strip() == '' else int(value)


def _one_of(options):
    def check(instance, attribute, value):
        if value not in options:
            raise ConfigError(f"Invalid {attribute.name} '{value}'. Accepted values are {tuple(options)}")
    return check


def _nonempty(instance, attribute, value):
    if not value:
        raise ConfigError(f"{attribute.name} must not be empty")


@attr.s
class Paths:
    """
    Input files. Only the files a command needs have to be set.
    """
    raster = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    channel = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    forced_land = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    parishes = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    parish_polygons = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    ports = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    market_access = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    census = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    counties = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    geography = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    sound_toll = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    port_locations = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    findings = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]
    soil = attr.ib(default=None, converter=_optional_path)  # type: Optional[str]

    def __attrs_post_init__(self):
        missing = {name: path for name, path in attr.asdict(self).items() if path is not None
                   and not os.path.exists(path)}
        if missing:
            raise ConfigError(f"Configured files do not exist: {missing}")

    def require(self, *names: str) -> None:
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise ConfigError(f"The command needs the paths {missing}")


@attr.s
class Parameters:
    seed = attr.ib(converter=int)  # type: int
    alpha = attr.ib(default=DEFAULT_ALPHA, converter=float)  # type: float
    theta = attr.ib(default=DEFAULT_THETA, converter=float)  # type: float
    theta_grid = attr.ib(default=THETA_GRID, converter=_float_list, validator=_nonempty)  # type: List[float]
    alpha_grid = attr.ib(default=ALPHA_GRID, converter=_float_list, validator=_nonempty)  # type: List[float]
    map_units_to_km = attr.ib(default=1., converter=float)  # type: float
    n_samples = attr.ib(default=1000, converter=int)  # type: int
    n_boot = attr.ib(default=200, converter=int)  # type: int
    prior_c = attr.ib(default=1., converter=float)  # type: float
    window = attr.ib(default=25, converter=int)  # type: int
    census_reference_year = attr.ib(default=1801, converter=int)  # type: int
    arch_reference_year = attr.ib(default=1000, converter=int)  # type: int
    suite_year = attr.ib(default=1901, converter=int)  # type: int
    bonferroni_m = attr.ib(default=None, converter=_optional_int)  # type: Optional[int]
    min_parish_share = attr.ib(default=.10, converter=float)  # type: float
    level = attr.ib(default=.05, converter=float)  # type: float


@attr.s
class Toggles:
    exclusion_windows = attr.ib(default=True, converter=_as_bool)  # type: bool
    dating_model = attr.ib(default='uniform', validator=_one_of(DATING_MODELS))  # type: str
    control_subgroup = attr.ib(default='all', validator=_one_of(SUBGROUPS))  # type: str
    subgroups = attr.ib(default=SUBGROUPS, converter=_str_list, validator=_nonempty)  # type: List[str]
    kinds = attr.ib(default=FINDING_KINDS, converter=_str_list, validator=_nonempty)  # type: List[str]
    outcome = attr.ib(default='population')  # type: str
    transform = attr.ib(default='log')  # type: str
    approach = attr.ib(default='dummy')  # type: str
    propensity_model = attr.ib(default='boosting', validator=_one_of(PROPENSITY_MODELS))  # type: str
    include_limfjord_controls = attr.ib(default=False, converter=_as_bool)  # type: bool
    svg = attr.ib(default=False, converter=_as_bool)  # type: bool
    write_cache = attr.ib(default=False, converter=_as_bool)  # type: bool

    def __attrs_post_init__(self):
        for name, options in (('subgroups', SUBGROUPS), ('kinds', FINDING_KINDS)):
            unknown = [v for v in getattr(self, name) if v not in options]
            if unknown:
                raise ConfigError(f"Invalid {name} {unknown}. Accepted values are {tuple(options)}")


def _file_digest(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 20), b''):
            digest.update(block)
    return digest.hexdigest()


@attr.s
class RunConfig:
    """
    Validated run configuration. Every configured file exists, the parameter grids are nonempty and a seed is
    given.
    """
    paths = attr.ib()  # type: Paths
    parameters = attr.ib()  # type: Parameters
    toggles = attr.ib()  # type: Toggles

    @property
    def seed(self) -> int:
        return self.parameters.seed

    @property
    def hash(self) -> str:
        """
        Digest of the parameters, the toggles and the content of every configured file.
        """
        state = {'paths': {name: _file_digest(path) for name, path in attr.asdict(self.paths).items()
                           if path is not None},
                 'parameters': attr.asdict(self.parameters),
                 'toggles': attr.asdict(self.toggles)}
        return hashlib.sha256(json.dumps(state, sort_keys=True).encode()).hexdigest()[:16]

    def header(self) -> str:
        return f'# config_hash={self.hash} seed={self.seed}'


def read_config_file(path: Union[str, os.PathLike]) -> Dict[str, Dict[str, str]]:
    """
    Read an INI configuration. Relative paths in ``[paths]`` are resolved against the file's directory.
    """
    if not os.path.exists(path):
        raise ConfigError(f"Configuration file {path} does not exist")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as e:
        raise ConfigError(f"Cannot parse {path}: {e}") from e
    unknown = [s for s in parser.sections() if s not in SECTIONS]
    if unknown:
        raise ConfigError(f"Unknown sections {unknown} in {path}. Accepted sections are {SECTIONS}")
    values = {section: dict(parser[section]) if parser.has_section(section) else {} for section in SECTIONS}
    base = Path(path).parent
    values['paths'] = {k: str(base / v) if v.strip() and not os.path.isabs(v) else v
                       for k, v in values['paths'].items()}
    return values


def load_config(path: Optional[Union[str, os.PathLike]] = None,
                overrides: Optional[Mapping[str, Mapping[str, object]]] = None) -> RunConfig:
    """
    Build a run configuration from an optional INI file and flag overrides; overrides win.

    Parameters
    ----------
    path
        INI file.
    overrides
        Values per section. `None` values are ignored.

    Raises
    ------
    ConfigError
        On unknown keys, unparseable values, missing files, empty grids or a missing seed.
    """
    values = read_config_file(path) if path is not None else {section: {} for section in SECTIONS}
    for section, items in (overrides or {}).items():
        values[section].update({k: v for k, v in items.items() if v is not None})
    if 'seed' not in values['parameters']:
        raise ConfigError('A seed is required, set it in [parameters] or with --seed')

    sections = {}
    for section, cls in zip(SECTIONS, (Paths, Parameters, Toggles)):
        fields = {a.name for a in attr.fields(cls)}
        unknown = sorted(set(values[section]) - fields)
        if unknown:
            raise ConfigError(f"Unknown keys {unknown} in [{section}]")
        try:
            sections[section] = cls(**values[section])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid [{section}] value: {e}") from e
    config = RunConfig(**sections)
    logger.debug('Run configuration: %s', attr.asdict(config))
    return config

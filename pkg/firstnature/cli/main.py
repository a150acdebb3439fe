"""
Command line entry point.

Exit codes are 0 on success, 2 on configuration errors, 3 on data errors and 4 on numerical failures. Failures
print one JSON line with the error class, message and exit code to stderr.
"""
import argparse
import json
import logging
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from firstnature.cli.commands import COMMANDS, RunContext
from firstnature.cli.config import load_config
from firstnature.exceptions import ConfigError, FirstNatureException, NumericalError

logger = logging.getLogger(__name__)

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')

# flag -> (section, key)
OVERRIDES = {'seed': ('parameters', 'seed'),
             'alpha': ('parameters', 'alpha'),
             'theta': ('parameters', 'theta'),
             'n_samples': ('parameters', 'n_samples'),
             'n_boot': ('parameters', 'n_boot'),
             'approach': ('toggles', 'approach'),
             'control_subgroup': ('toggles', 'control_subgroup'),
             'dating_model': ('toggles', 'dating_model'),
             'svg': ('toggles', 'svg')}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='firstnature',
                                     description='Market access, event studies and matching around the opening '
                                                 'of a waterway.')
    parser.add_argument('--config', help='INI file with [paths], [parameters] and [toggles] sections.')
    parser.add_argument('--seed', type=int, help='Seed of every random step; required here or in the config.')
    parser.add_argument('--threads', type=int, default=1, help='Worker threads, -1 for one per CPU.')
    parser.add_argument('--out-dir', default='.', help='Output directory.')
    parser.add_argument('--log-level', default='INFO', choices=LOG_LEVELS)
    parser.add_argument('--progress', action='store_true', help='Show progress bars.')
    parser.add_argument('--set', action='append', default=[], metavar='SECTION.KEY=VALUE',
                        help='Override any configuration value, may be repeated.')
    parser.add_argument('--alpha', type=float, help='Land/water cost ratio.')
    parser.add_argument('--theta', type=float, help='Distance elasticity of market access.')
    parser.add_argument('--n-samples', type=int, help='Monte Carlo replicates of the activity panels.')
    parser.add_argument('--n-boot', type=int, help='Bootstrap draws.')
    parser.add_argument('--approach', help="Treatment: 'dummy', 'continuous' or 'three_region'.")
    parser.add_argument('--control-subgroup', help='Estimation subgroup.')
    parser.add_argument('--dating-model', help="'uniform' or 'normal'.")
    parser.add_argument('--svg', action='store_const', const=True, help='Also render SVG figures.')

    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    costdist = sub.add_parser('costdist', help='Least-cost distances from one source point.')
    costdist.add_argument('--source', nargs=2, type=float, required=True, metavar=('X', 'Y'),
                          help='Source point in raster map units.')

    sub.add_parser('ma', help='Market access before and after the opening.')

    eventstudy = sub.add_parser('eventstudy', help='Census event study.')
    eventstudy.add_argument('--suite', action='store_true', help='Also run the occupation regressions.')

    sub.add_parser('ppml', help='Trade regressions on the toll records.')
    sub.add_parser('arch', help='Activity panels and bootstrapped event studies of archaeological findings.')

    match = sub.add_parser('match', help='Propensity score matching on soil shares.')
    match.add_argument('--save-model', metavar='DIR', help='Directory to save the fitted propensity model to.')

    pipeline = sub.add_parser('pipeline', help='Every stage and one coefficient table.')
    pipeline.add_argument('--multiverse', action='store_true',
                          help='Sweep the theta, alpha and subgroup grids instead.')

    synth = sub.add_parser('synth', help='Write a synthetic world and its configuration to the output directory.')
    synth.add_argument('--nrows', type=int, default=40)
    synth.add_argument('--ncols', type=int, default=60)
    synth.add_argument('--n-parishes', type=int, default=60)
    synth.add_argument('--mean-population', type=float, default=100.)
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Dict[str, object]]:
    overrides = {'paths': {}, 'parameters': {}, 'toggles': {}}  # type: Dict[str, Dict[str, object]]
    for item in args.set:
        key, sep, value = item.partition('=')
        section, dot, name = key.partition('.')
        if not sep or not dot or section not in overrides:
            raise ConfigError(f"Cannot parse override '{item}', expected SECTION.KEY=VALUE")
        overrides[section][name.strip()] = value.strip()
    for flag, (section, name) in OVERRIDES.items():
        value = getattr(args, flag)
        if value is not None:
            overrides[section][name] = value
    return overrides


def exit_code_of(error: BaseException) -> int:
    if isinstance(error, FirstNatureException):
        return error.exit_code
    if isinstance(error, np.linalg.LinAlgError):
        return NumericalError.exit_code
    return ConfigError.exit_code


def error_line(error: BaseException, exit_code: int) -> str:
    return json.dumps({'error': type(error).__name__, 'message': str(error), 'exit_code': exit_code})


def run(args: argparse.Namespace) -> List:
    config = load_config(args.config, overrides_from_args(args))
    ctx = RunContext(config=config, out_dir=args.out_dir, n_jobs=args.threads, progress=args.progress)
    logger.info('Running %s, %s', args.command, ctx.header.lstrip('# '))
    written = COMMANDS[args.command](ctx, args)
    logger.info('%s wrote %d files to %s', args.command, len(written), ctx.out_dir)
    return written


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        run(args)
    except (FirstNatureException, ValueError, np.linalg.LinAlgError) as e:
        exit_code = exit_code_of(e)
        logger.debug('Run failed', exc_info=True)
        print(error_line(e, exit_code), file=sys.stderr)
        return exit_code
    return 0

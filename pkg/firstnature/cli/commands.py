"""
Subcommands of the command line. Every command reads its inputs from the run configuration, runs one stage of the
pipeline and writes its tables to the output directory.
"""
import configparser
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import attr
import pandas as pd

from firstnature.access.market_access import (ParishSite, baseline_ports, compute_market_access,
                                              counterfactual_ports, load_parishes, load_ports,
                                              market_access_records, port_distance_matrix, standardize)
from firstnature.archaeology.activity import finding_records, load_findings, monte_carlo_panel, resolve_parishes
from firstnature.archaeology.bootstrap import (APPROACHES as ARCH_APPROACHES, ArchEventStudy, apply_bootstrap,
                                               clustered_bootstrap, panel_frame)
from firstnature.archaeology.cache import write_replicate_cache
from firstnature.cli.config import RunConfig
from firstnature.cli.output import write_figure, write_frame
from firstnature.datasets import generate_synthetic_world, write_synthetic_world
from firstnature.estimators.event_study import EventStudyFit, EventStudySpec, twfe_event_study
from firstnature.estimators.ppml import PpmlFit
from firstnature.estimators.reporting import coefficients_table
from firstnature.estimators.subgroups import SUBGROUP_LABELS, load_geography, select_subgroup
from firstnature.estimators.suite import occupation_suite
from firstnature.estimators.trade import TRADE_OLS_TRANSFORMS, OlsFit, trade_ols, trade_ppml
from firstnature.exceptions import ConfigError, DataError, NumericalError
from firstnature.geo.cost_distance import cost_distance
from firstnature.geo.raster import CostSurface, build_cost_surface, load_polygons, open_waterway
from firstnature.matching.greedy import balance_report, greedy_match, matched_sample, matching_pools
from firstnature.matching.propensity import GradientBoostedPropensity, LogisticPropensity, fit_propensity, load_soil
from firstnature.paneldata.census import aggregate_census, attach_treatment, load_census, load_counties
from firstnature.paneldata.trade import EXCLUSION_WINDOWS, build_trade_panel, load_port_locations, load_sound_toll

logger = logging.getLogger(__name__)

CENSUS_CHUNKSIZE = 200_000

MULTIVERSE_COLUMNS = ['theta', 'alpha', 'subgroup', 'label', 'event_year', 'estimate', 'se', 'p', 'ci_lower',
                      'ci_upper', 'n_obs', 'n_clusters']


@attr.s
class RunContext:
    config = attr.ib()  # type: RunConfig
    out_dir = attr.ib(converter=Path)  # type: Path
    n_jobs = attr.ib(default=1)  # type: int
    progress = attr.ib(default=False)  # type: bool
    header = attr.ib(init=False)  # type: str

    @header.default
    def _header(self) -> str:
        # hashes every input file, so computed once per run
        return self.config.header()

    def write(self, frame: pd.DataFrame, name: str, index: bool = False) -> Path:
        return write_frame(frame, self.out_dir / name, self.header, index=index)


# inputs shared between commands

def _cost_surface(ctx: RunContext, alpha: Optional[float] = None) -> CostSurface:
    paths, params = ctx.config.paths, ctx.config.parameters
    paths.require('raster')
    forced = load_polygons(paths.forced_land) if paths.forced_land else None
    return build_cost_surface(paths.raster, params.alpha if alpha is None else alpha, forced_land_regions=forced,
                              map_units_to_km=params.map_units_to_km)


def _surface_after(ctx: RunContext, surface: CostSurface) -> Optional[CostSurface]:
    """
    Surface with the channel open, or `None` if the port sets alone differ between the scenarios.
    """
    if ctx.config.paths.channel is None:
        return None
    return open_waterway(surface, load_polygons(ctx.config.paths.channel))


def _parishes(ctx: RunContext) -> List[ParishSite]:
    ctx.config.paths.require('parishes')
    return load_parishes(ctx.config.paths.parishes)


def _regions(parishes: List[ParishSite]) -> Dict[str, Optional[str]]:
    return {p.id: p.region for p in parishes}


def _market_access(ctx: RunContext, parishes: Optional[List[ParishSite]] = None) -> pd.DataFrame:
    """
    Market access records read from `paths.market_access` if configured, computed otherwise.
    """
    paths, params = ctx.config.paths, ctx.config.parameters
    if paths.market_access is not None:
        frame = pd.read_csv(paths.market_access, comment='#', dtype={'parish_id': str})
        if not {'parish_id', 'delta_log_ma'} <= set(frame.columns):
            raise DataError(f"{paths.market_access} must contain parish_id and delta_log_ma columns")
        return frame
    paths.require('ports')
    parishes = _parishes(ctx) if parishes is None else parishes
    surface = _cost_surface(ctx)
    return compute_market_access(parishes, load_ports(paths.ports), params.theta, surface,
                                 surface_after=_surface_after(ctx, surface), n_jobs=ctx.n_jobs,
                                 progress=ctx.progress)


def _census_panel(ctx: RunContext, parishes: List[ParishSite], ma: Optional[pd.DataFrame]) -> pd.DataFrame:
    paths = ctx.config.paths
    paths.require('census')
    counties = load_counties(paths.counties) if paths.counties else None
    records = load_census(paths.census, chunksize=CENSUS_CHUNKSIZE)
    panel = aggregate_census(records, parishes=[p.id for p in parishes], counties=counties)
    return attach_treatment(panel, _regions(parishes), ma)


def _restrict(ctx: RunContext, panel: pd.DataFrame, subgroup: str) -> pd.DataFrame:
    if subgroup == 'all':
        return panel
    ctx.config.paths.require('geography')
    return select_subgroup(panel, load_geography(ctx.config.paths.geography), subgroup)


def _census_spec(ctx: RunContext, treatment: Optional[str] = None, **kwargs) -> EventStudySpec:
    params, toggles = ctx.config.parameters, ctx.config.toggles
    return EventStudySpec(outcome=toggles.outcome, transform=toggles.transform,
                          treatment=toggles.approach if treatment is None else treatment,
                          reference_year=params.census_reference_year, bonferroni_m=params.bonferroni_m, **kwargs)


def _arch_treatments(ctx: RunContext, parishes: List[ParishSite], approach: str) -> pd.DataFrame:
    """
    Parish treatments of the closing: the west Limfjord indicator and the change in log market access from the
    closing, which undoes the opening.
    """
    frame = pd.DataFrame({'parish_id': [p.id for p in parishes],
                          'treatment_dummy': [int(p.region == 'west') for p in parishes]})
    if approach == 'continuous':
        ma = _market_access(ctx, parishes)
        opening = ma.set_index(ma['parish_id'].astype(str))['delta_log_ma']
        frame['delta_log_ma'] = -frame['parish_id'].map(opening)
    return frame


def _propensity_model(ctx: RunContext):
    if ctx.config.toggles.propensity_model == 'logistic':
        return LogisticPropensity()
    return GradientBoostedPropensity(seed=ctx.config.seed)


# stages

def census_event_study(ctx: RunContext, panel: pd.DataFrame, treatment: Optional[str] = None,
                       subgroup: Optional[str] = None) -> EventStudyFit:
    subgroup = ctx.config.toggles.control_subgroup if subgroup is None else subgroup
    return twfe_event_study(_restrict(ctx, panel, subgroup), _census_spec(ctx, treatment))


def trade_fits(ctx: RunContext) -> Tuple[PpmlFit, Dict[str, OlsFit]]:
    paths = ctx.config.paths
    paths.require('sound_toll', 'port_locations')
    windows = EXCLUSION_WINDOWS if ctx.config.toggles.exclusion_windows else None
    panel = build_trade_panel(load_sound_toll(paths.sound_toll), load_port_locations(paths.port_locations),
                              exclude_windows=windows)
    ppml_fit = trade_ppml(panel)
    ols_fits = {transform: trade_ols(panel, transform=transform) for transform in TRADE_OLS_TRANSFORMS}
    return ppml_fit, ols_fits


def arch_fits(ctx: RunContext, parishes: List[ParishSite]) -> Dict[str, Tuple[EventStudyFit, object]]:
    """
    Bootstrapped event study of the activity panel of every finding kind.

    Returns
    -------
    Kind -> (fit with bootstrap inference, activity panel).
    """
    paths, params, toggles = ctx.config.paths, ctx.config.parameters, ctx.config.toggles
    paths.require('findings', 'parish_polygons')
    approach = toggles.approach
    if approach not in ARCH_APPROACHES:
        raise ConfigError(f"The activity event study supports the approaches {ARCH_APPROACHES}, got '{approach}'")
    polygons = load_polygons(paths.parish_polygons, id_property='id')
    findings = resolve_parishes(load_findings(paths.findings), polygons, kinds=toggles.kinds)
    estimator = ArchEventStudy(treatments=_arch_treatments(ctx, parishes, approach), approach=approach,
                               reference_year=params.arch_reference_year)
    parish_ids = sorted(polygons)

    out = {}
    for kind in toggles.kinds:
        records = finding_records(findings.loc[findings['kind'] == kind], dating_model=toggles.dating_model)
        if not records:
            logger.warning('No %s findings remain, skipping', kind)
            continue
        panel = monte_carlo_panel(records, parish_ids=parish_ids, window=params.window, n_samples=params.n_samples,
                                  seed=ctx.config.seed, prior_c=params.prior_c, n_jobs=ctx.n_jobs,
                                  progress=ctx.progress)
        fit = estimator.fit(panel_frame(panel))
        boot = clustered_bootstrap(panel, estimator, n_boot=params.n_boot, seed=ctx.config.seed,
                                   level=params.level, n_jobs=ctx.n_jobs, progress=ctx.progress)
        out[kind] = (apply_bootstrap(fit, boot), panel)
    if not out:
        raise DataError('No findings of the requested kinds lie in any parish')
    return out


def match_parishes(ctx: RunContext, parishes: Optional[List[ParishSite]] = None):
    """
    Fit the propensity model and match treated to control parishes.

    Returns
    -------
    Scores, fitted model, treated ids, control ids and the matching.
    """
    paths, params, toggles = ctx.config.paths, ctx.config.parameters, ctx.config.toggles
    paths.require('soil')
    soil = load_soil(paths.soil)
    scores, model = fit_propensity(soil, _propensity_model(ctx), min_parish_share=params.min_parish_share)
    if parishes is None and paths.parishes is not None:
        parishes = _parishes(ctx)
    regions = _regions(parishes) if parishes is not None else None
    treated = soil.set_index(soil['parish_id'].astype(str))['treated']
    treated_ids, control_ids = matching_pools(treated, regions,
                                              include_limfjord_controls=toggles.include_limfjord_controls)
    match = greedy_match(scores, treated_ids, control_ids, seed=ctx.config.seed)
    return scores, model, treated_ids, control_ids, match


# commands

def cmd_costdist(ctx: RunContext, args) -> List[Path]:
    surface = _cost_surface(ctx)
    source = surface.snap(*args.source)
    field = cost_distance(surface, source)
    logger.info('%d of %d cells are reachable from %s', field.n_reachable, field.distances.size, source)
    path = ctx.out_dir / 'cost_distance.csv'
    path.parent.mkdir(parents=True, exist_ok=True)
    field.write_csv(path, header=ctx.header)
    return [path]


def cmd_ma(ctx: RunContext, args) -> List[Path]:
    ma = _market_access(ctx)
    return [ctx.write(ma, 'market_access.csv')]


def cmd_eventstudy(ctx: RunContext, args) -> List[Path]:
    params, toggles = ctx.config.parameters, ctx.config.toggles
    parishes = _parishes(ctx)
    ma = _market_access(ctx, parishes) if toggles.approach == 'continuous' or args.suite else None
    panel = _census_panel(ctx, parishes, ma)
    fit = census_event_study(ctx, panel)
    written = [ctx.write(fit.to_frame(level=params.level), 'event_study.csv')]
    if args.suite:
        suite = occupation_suite(panel, year=params.suite_year, reference_year=params.census_reference_year,
                                 m=params.bonferroni_m, level=params.level, n_jobs=ctx.n_jobs, progress=ctx.progress)
        written.append(ctx.write(suite, 'occupation_suite.csv'))
    if toggles.svg:
        from firstnature.utils.visualization import plot_event_study
        ax = plot_event_study(fit, level=params.level)
        written.append(write_figure(ax.figure, ctx.out_dir / 'event_study.svg'))
    return written


def cmd_ppml(ctx: RunContext, args) -> List[Path]:
    ppml_fit, ols_fits = trade_fits(ctx)
    ols_table = pd.concat([fit.to_frame().assign(transform=transform) for transform, fit in ols_fits.items()],
                          ignore_index=True)
    return [ctx.write(ppml_fit.to_frame(), 'trade_ppml.csv'), ctx.write(ols_table, 'trade_ols.csv')]


def cmd_arch(ctx: RunContext, args) -> List[Path]:
    params = ctx.config.parameters
    written = []
    for kind, (fit, panel) in arch_fits(ctx, _parishes(ctx)).items():
        written.append(ctx.write(fit.to_frame(level=params.level), f'arch_{kind}.csv'))
        written.append(ctx.write(panel.to_frame(), f'activity_{kind}.csv'))
        if ctx.config.toggles.write_cache:
            path = ctx.out_dir / f'replicates_{kind}.apsa'
            write_replicate_cache(panel.replicates, path)
            written.append(path)
        if ctx.config.toggles.svg:
            from firstnature.utils.visualization import plot_event_study
            ax = plot_event_study(fit, level=params.level)
            written.append(write_figure(ax.figure, ctx.out_dir / f'arch_{kind}.svg'))
    return written


def cmd_match(ctx: RunContext, args) -> List[Path]:
    scores, model, treated_ids, control_ids, match = match_parishes(ctx)
    balance = balance_report(match, scores, treated_ids, control_ids)
    written = [ctx.write(match.to_frame(), 'matches.csv'),
               ctx.write(balance.rename_axis('sample'), 'balance.csv', index=True),
               ctx.write(scores.rename_axis('parish_id').reset_index(), 'propensity.csv')]
    if ctx.config.toggles.svg:
        from firstnature.utils.visualization import plot_propensity_balance
        axes = plot_propensity_balance(scores, treated_ids, control_ids, matched_sample(match))
        written.append(write_figure(axes[0].figure, ctx.out_dir / 'propensity_balance.svg'))
    if getattr(args, 'save_model', None):
        model.save(args.save_model)
        written.append(Path(args.save_model))
    return written


def _multiverse(ctx: RunContext, parishes: List[ParishSite]) -> pd.DataFrame:
    """
    Continuous event study over the grids of distance decay, land/water cost ratio and control subgroup, with the
    market access change standardized to unit variance. Distances are computed once per cost ratio.
    """
    from tqdm import tqdm

    params, toggles = ctx.config.parameters, ctx.config.toggles
    ctx.config.paths.require('ports', 'census')
    ports = load_ports(ctx.config.paths.ports)
    base_panel = _census_panel(ctx, parishes, None).drop(columns='delta_log_ma')
    rows = []
    cells = [(a, t, s) for a in params.alpha_grid for t in params.theta_grid for s in toggles.subgroups]
    pbar = tqdm(total=len(cells), disable=not ctx.progress, desc='multiverse')
    for alpha in params.alpha_grid:
        surface = _cost_surface(ctx, alpha)
        surface_after = _surface_after(ctx, surface) or surface
        before = port_distance_matrix(parishes, baseline_ports(ports), surface, n_jobs=ctx.n_jobs)
        after = port_distance_matrix(parishes, counterfactual_ports(ports), surface_after, n_jobs=ctx.n_jobs)
        for theta in params.theta_grid:
            ma = market_access_records(before, after, theta, alpha=alpha)
            ma['delta_log_ma'] = standardize(ma['delta_log_ma'])
            panel = base_panel.merge(ma[['parish_id', 'delta_log_ma']], on='parish_id', how='left')
            for subgroup in toggles.subgroups:
                pbar.update(1)
                try:
                    fit = census_event_study(ctx, panel, treatment='continuous', subgroup=subgroup)
                except (DataError, NumericalError) as e:
                    logger.warning('Skipping theta=%s alpha=%s subgroup=%s: %s', theta, alpha, subgroup, e)
                    continue
                table = fit.to_frame(level=params.level)
                table = table.loc[~table['reference']]
                for row in table.itertuples(index=False):
                    rows.append({'theta': theta, 'alpha': alpha, 'subgroup': subgroup,
                                 'label': SUBGROUP_LABELS.get(subgroup, ''), 'event_year': row.event_year,
                                 'estimate': row.estimate, 'se': row.se, 'p': row.p, 'ci_lower': row.ci_lower,
                                 'ci_upper': row.ci_upper, 'n_obs': fit.data['n_obs'],
                                 'n_clusters': fit.data['n_clusters']})
    pbar.close()
    if not rows:
        raise NumericalError('Every multiverse specification failed')
    return pd.DataFrame(rows, columns=MULTIVERSE_COLUMNS)


def cmd_pipeline(ctx: RunContext, args) -> List[Path]:
    """
    Market access, census event studies, trade regressions, activity event studies and the matched sample
    event study, collected in one coefficient table. Stages whose inputs are not configured are skipped.
    """
    paths, params = ctx.config.paths, ctx.config.parameters
    parishes = _parishes(ctx)
    if args.multiverse:
        return [ctx.write(_multiverse(ctx, parishes), 'multiverse.csv')]

    written = []
    ma = _market_access(ctx, parishes)
    written.append(ctx.write(ma, 'market_access.csv'))
    panel = _census_panel(ctx, parishes, ma)

    fits = {}
    for treatment in ('dummy', 'continuous', 'three_region'):
        fit = census_event_study(ctx, panel, treatment=treatment)
        fits[f'census_{treatment}'] = fit
        written.append(ctx.write(fit.to_frame(level=params.level), f'event_study_{treatment}.csv'))

    if paths.sound_toll is not None and paths.port_locations is not None:
        ppml_fit, ols_fits = trade_fits(ctx)
        fits['trade_ppml'] = ppml_fit
        fits.update({f'trade_ols_{transform}': fit for transform, fit in ols_fits.items()})
    else:
        logger.info('No toll records configured, skipping the trade regressions')

    if paths.findings is not None and paths.parish_polygons is not None:
        for kind, (fit, panel_kind) in arch_fits(ctx, parishes).items():
            fits[f'arch_{kind}'] = fit
            written.append(ctx.write(fit.to_frame(level=params.level), f'arch_{kind}.csv'))
    else:
        logger.info('No findings configured, skipping the activity event studies')

    if paths.soil is not None:
        scores, _, treated_ids, control_ids, match = match_parishes(ctx, parishes)
        written.append(ctx.write(match.to_frame(), 'matches.csv'))
        written.append(ctx.write(balance_report(match, scores, treated_ids, control_ids).rename_axis('sample'),
                                 'balance.csv', index=True))
        matched = panel.loc[panel['parish_id'].astype(str).isin(set(matched_sample(match)))]
        fits['census_matched'] = twfe_event_study(matched, _census_spec(ctx, 'dummy'))
    else:
        logger.info('No soil shares configured, skipping the matched sample')

    written.append(ctx.write(coefficients_table(fits), 'coefficients.csv'))
    return written


def cmd_synth(ctx: RunContext, args) -> List[Path]:
    """
    Write a synthetic world and a configuration file pointing at it.
    """
    world = generate_synthetic_world(seed=ctx.config.seed, nrows=args.nrows, ncols=args.ncols,
                                     n_parishes=args.n_parishes, mean_population=args.mean_population)
    paths = write_synthetic_world(world, ctx.out_dir, header=ctx.header)

    parser = configparser.ConfigParser()
    parser['paths'] = {name: path.name for name, path in paths.items() if name != 'ground_truth'}
    parser['parameters'] = {'seed': str(ctx.config.seed)}
    parser['toggles'] = {}
    config_path = ctx.out_dir / 'firstnature.ini'
    with open(config_path, 'w') as f:
        parser.write(f)
    logger.info('Wrote %s', config_path)
    return list(paths.values()) + [config_path]


COMMANDS = {'costdist': cmd_costdist,
            'ma': cmd_ma,
            'eventstudy': cmd_eventstudy,
            'ppml': cmd_ppml,
            'arch': cmd_arch,
            'match': cmd_match,
            'pipeline': cmd_pipeline,
            'synth': cmd_synth}

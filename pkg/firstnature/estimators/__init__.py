"""
The 'firstnature.estimators' module contains the two-way fixed effects event studies, the PPML and least squares
trade regressions and the inference and reporting tools built around them.
"""

from .event_study import (EventStudyFit, EventStudySpec, demean_two_way, prepare_sample, three_region_event_study,
                          twfe_event_study)
from .inference import bonferroni_adjust, cluster_robust_cov, cluster_robust_se, critical_value, p_values
from .ppml import PpmlFit, ppml
from .reporting import ape_share, coefficients_table, percent_from_logpoints, treated_means
from .subgroups import SUBGROUPS, load_geography, parish_geography, select_subgroup, subgroup_parishes
from .suite import age_group_effects, occupation_suite, run_event_studies
from .trade import OlsFit, ols, trade_design, trade_ols, trade_ppml
from .transforms import TRANSFORMS, transform_outcome

__all__ = ["EventStudyFit",
           "EventStudySpec",
           "OlsFit",
           "PpmlFit",
           "SUBGROUPS",
           "TRANSFORMS",
           "age_group_effects",
           "ape_share",
           "bonferroni_adjust",
           "cluster_robust_cov",
           "cluster_robust_se",
           "coefficients_table",
           "critical_value",
           "demean_two_way",
           "load_geography",
           "occupation_suite",
           "ols",
           "p_values",
           "parish_geography",
           "percent_from_logpoints",
           "ppml",
           "prepare_sample",
           "run_event_studies",
           "select_subgroup",
           "subgroup_parishes",
           "three_region_event_study",
           "trade_design",
           "trade_ols",
           "trade_ppml",
           "transform_outcome",
           "treated_means",
           "twfe_event_study",
           ]

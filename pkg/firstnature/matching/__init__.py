"""
The 'firstnature.matching' module scores parishes with soil-based propensity models and builds matched samples by
greedy one-to-one matching without replacement.
"""

from .greedy import MatchResult, balance_report, greedy_match, load_matches, matched_sample, matching_pools
from .propensity import (GradientBoostedPropensity, LogisticPropensity, filter_soil_types, fit_propensity,
                         load_soil)

__all__ = ["GradientBoostedPropensity",
           "LogisticPropensity",
           "MatchResult",
           "balance_report",
           "filter_soil_types",
           "fit_propensity",
           "greedy_match",
           "load_matches",
           "load_soil",
           "matched_sample",
           "matching_pools",
           ]

"""
The 'firstnature.archaeology' module turns interval-dated archaeological findings into parish x year activity
panels and estimates event studies on them with clustered bootstrap inference.
"""

from .activity import (ActivityPanel, exact_activity_probability, finding_records, load_findings,
                       monte_carlo_panel, resolve_parishes, year_grid)
from .bootstrap import (ArchEventStudy, BootstrapResult, apply_bootstrap, arch_event_study, clustered_bootstrap,
                        panel_frame)
from .cache import read_replicate_cache, write_replicate_cache
from .dating import DATING_MODELS, FINDING_KINDS, FindingRecord, dating_distribution, dating_probability

__all__ = ["ActivityPanel",
           "ArchEventStudy",
           "BootstrapResult",
           "DATING_MODELS",
           "FINDING_KINDS",
           "FindingRecord",
           "apply_bootstrap",
           "arch_event_study",
           "clustered_bootstrap",
           "dating_distribution",
           "dating_probability",
           "exact_activity_probability",
           "finding_records",
           "load_findings",
           "monte_carlo_panel",
           "panel_frame",
           "read_replicate_cache",
           "resolve_parishes",
           "write_replicate_cache",
           "year_grid",
           ]

"""
This module defines the default metadata and data dictionaries for each result type.
Note that the "name" field is populated by the routine producing the result and the
"version" field with the package version.
"""
# Event studies
DEFAULT_META_EVENT_STUDY = {"name": None,
                            "type": ["twfe", "event_study"],
                            "params": {},
                            "version": None}  # type: dict
"""
Default event study metadata.
"""

DEFAULT_DATA_EVENT_STUDY = {"event_years": [],
                            "treatments": [],
                            "terms": [],
                            "reference_year": None,
                            "beta": None,
                            "se": None,
                            "p": None,
                            "p_bonferroni": None,
                            "bonferroni_m": None,
                            "cov": None,
                            "n_obs": None,
                            "n_clusters": None,
                            "n_parishes_included": None}  # type: dict
"""
Default event study data. `beta`, `se`, `p` and `p_bonferroni` are arrays of shape
(n_event_years, n_treatments); the reference year row is structurally zero.
"""

# Poisson pseudo maximum likelihood
DEFAULT_META_PPML = {"name": None,
                     "type": ["glm", "poisson"],
                     "params": {},
                     "version": None}  # type: dict
"""
Default PPML metadata.
"""

DEFAULT_DATA_PPML = {"terms": [],
                     "coefficients": None,
                     "se": None,
                     "p": None,
                     "cov": None,
                     "log_likelihood": None,
                     "iterations": None,
                     "converged": None,
                     "n_obs": None,
                     "n_clusters": None}  # type: dict
"""
Default PPML data.
"""

# Cross-sectional least squares
DEFAULT_META_OLS = {"name": None,
                    "type": ["ols"],
                    "params": {},
                    "version": None}  # type: dict
"""
Default least squares metadata.
"""

DEFAULT_DATA_OLS = {"terms": [],
                    "coefficients": None,
                    "se": None,
                    "p": None,
                    "cov": None,
                    "n_obs": None,
                    "n_clusters": None}  # type: dict
"""
Default least squares data.
"""

# Clustered bootstrap
DEFAULT_META_BOOTSTRAP = {"name": None,
                          "type": ["bootstrap", "clustered"],
                          "params": {},
                          "version": None}  # type: dict
"""
Default clustered bootstrap metadata.
"""

DEFAULT_DATA_BOOTSTRAP = {"terms": [],
                          "estimate": None,
                          "draws": None,
                          "se": None,
                          "ci_lower": None,
                          "ci_upper": None,
                          "n_boot": None,
                          "n_failed": 0}  # type: dict
"""
Default clustered bootstrap data. `draws` has shape (n_boot, n_terms) with `nan` rows for failed draws.
"""

# Matching
DEFAULT_META_MATCH = {"name": None,
                      "type": ["matching", "greedy"],
                      "params": {},
                      "version": None}  # type: dict
"""
Default matching metadata.
"""

DEFAULT_DATA_MATCH = {"pairs": [],
                      "unmatched": [],
                      "deltas": None,
                      "order": [],
                      "score_treated": None,
                      "score_control": None}  # type: dict
"""
Default matching data. `pairs` holds (treated id, control id) tuples in the order they were formed; `order` is the
visiting order of the treated parishes.
"""

# Propensity models
DEFAULT_META_PROPENSITY = {"name": None,
                           "type": ["propensity"],
                           "params": {},
                           "version": None}  # type: dict
"""
Default propensity model metadata.
"""

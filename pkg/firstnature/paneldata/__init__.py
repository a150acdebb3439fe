"""
The 'firstnature.paneldata' module turns census records and toll records into the parish x year and
port x year panels used by the estimators.
"""

from .census import (CENSUS_YEARS, GROUP_COLUMNS, aggregate_census, age_bin_labels, attach_treatment, hisco_group,
                     load_census, load_counties, occupation_columns)
from .trade import (EXCLUSION_WINDOWS, POST_YEAR, TRADE_YEARS, build_trade_panel, load_port_locations,
                    load_sound_toll, location_dummies, trade_location_classes)

__all__ = ["CENSUS_YEARS",
           "EXCLUSION_WINDOWS",
           "GROUP_COLUMNS",
           "POST_YEAR",
           "TRADE_YEARS",
           "aggregate_census",
           "age_bin_labels",
           "attach_treatment",
           "build_trade_panel",
           "hisco_group",
           "load_census",
           "load_counties",
           "load_port_locations",
           "load_sound_toll",
           "location_dummies",
           "occupation_columns",
           "trade_location_classes",
           ]

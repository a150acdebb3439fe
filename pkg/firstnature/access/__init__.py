"""
The 'firstnature.access' module computes parish market access under alternative port sets and assigns
parishes to the Limfjord regions.
"""

from .market_access import (ALPHA_GRID, DEFAULT_ALPHA, DEFAULT_THETA, THETA_GRID, MarketAccessRecord, ParishSite,
                            Port, compute_market_access, delta_log_ma, eligible_ports, load_parishes, load_ports,
                            market_access, market_access_from_distances, market_access_records,
                            port_distance_matrix, standardize)
from .regions import DEFAULT_BUFFER_KM, DEFAULT_DIVIDER, RegionClassifier, assign_regions, classify_region

__all__ = ["ALPHA_GRID",
           "DEFAULT_ALPHA",
           "DEFAULT_BUFFER_KM",
           "DEFAULT_DIVIDER",
           "DEFAULT_THETA",
           "THETA_GRID",
           "MarketAccessRecord",
           "ParishSite",
           "Port",
           "RegionClassifier",
           "assign_regions",
           "classify_region",
           "compute_market_access",
           "delta_log_ma",
           "eligible_ports",
           "load_parishes",
           "load_ports",
           "market_access",
           "market_access_from_distances",
           "market_access_records",
           "port_distance_matrix",
           "standardize",
           ]

"""
Tracking performance: OSPA and Monte Carlo aggregation.
"""

from src.metrics.aggregate import AggregationError, TrialSeries, mc_aggregate
from src.metrics.ospa import OspaParams, ospa

__all__ = ["AggregationError", "TrialSeries", "mc_aggregate", "OspaParams", "ospa"]

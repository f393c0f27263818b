"""
Monte Carlo aggregation of per-trial time series.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd


class AggregationError(Exception):
    """Raised when trial series cannot be aggregated"""
    pass


@dataclass(frozen=True)
class TrialSeries:
    """One trial: per-time OSPA, estimated and true cardinality"""

    time: np.ndarray
    ospa: np.ndarray
    est_card: np.ndarray
    true_card: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("time", "ospa", "est_card", "true_card"):
            arrays[name] = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            object.__setattr__(self, name, arrays[name])
        if len({a.size for a in arrays.values()}) != 1:
            raise AggregationError("time, ospa and cardinality series must have equal length")


def _mean_and_se(stack: np.ndarray):
    mean = stack.mean(axis=0)
    if stack.shape[0] < 2:
        return mean, np.zeros_like(mean)
    return mean, stack.std(axis=0, ddof=1) / np.sqrt(stack.shape[0])


def mc_aggregate(per_trial: Sequence[TrialSeries]) -> pd.DataFrame:
    """
    Pointwise mean and standard error across trials.

    Trials are reduced in the order given. The standard error is 0 for a
    single trial.

    Returns:
        DataFrame with columns time, true_n, mean_est_n, se_est_n, mean_ospa, se_ospa

    Raises:
        AggregationError: on an empty trial list or unequal time axes
    """
    if not per_trial:
        raise AggregationError("cannot aggregate an empty list of trials")
    time = per_trial[0].time
    for series in per_trial[1:]:
        if series.time.shape != time.shape or not np.array_equal(series.time, time):
            raise AggregationError("all trials must share the same time axis")

    ospa_mean, ospa_se = _mean_and_se(np.stack([s.ospa for s in per_trial]))
    card_mean, card_se = _mean_and_se(np.stack([s.est_card for s in per_trial]))
    true_mean, _ = _mean_and_se(np.stack([s.true_card for s in per_trial]))

    return pd.DataFrame(
        {
            "time": time.astype(int),
            "true_n": true_mean,
            "mean_est_n": card_mean,
            "se_est_n": card_se,
            "mean_ospa": ospa_mean,
            "se_ospa": ospa_se,
        }
    )

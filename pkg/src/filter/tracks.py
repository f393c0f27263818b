"""
Track extraction from a filtering density.
"""

from typing import List

from src.glmb.dglmb import cardinality
from src.filter.models import FilterState, TrackEstimate


def extract_tracks(state: FilterState) -> List[TrackEstimate]:
    """
    MAP cardinality n*, then the heaviest component with n* labels (ties by
    canonical label-set order); one estimate per label at its cloud mean.
    """
    n_star = cardinality(state.density).map_estimate()
    candidates = [c for c in state.density.components if len(c.label_set) == n_star]
    if not candidates:
        return []
    best = min(candidates, key=lambda c: (-c.weight, c.label_set.sort_key()))
    return [
        TrackEstimate(label, state.time, best.densities[label].mean())
        for label in best.label_set
    ]

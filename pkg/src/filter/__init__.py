"""
Particle delta-GLMB multi-object filter: LMB-birth prediction, generic and
separable updates, track extraction.
"""

from src.filter.enumeration import k_best_subsets
from src.filter.models import (
    BirthModel,
    DegenerateUpdateError,
    FilterParams,
    FilterState,
    GridTransition,
    SurvivalModel,
    TrackEstimate,
    Transition,
    TruncationCaps,
)
from src.filter.predict import predict, resample_clouds
from src.filter.smc import (
    RngStage,
    RngStreams,
    effective_sample_size,
    systematic_indices,
    systematic_resample,
)
from src.filter.tracks import extract_tracks
from src.filter.update import generic_update, grid_joint, separable_update_path

__all__ = [
    "k_best_subsets",
    "BirthModel",
    "DegenerateUpdateError",
    "FilterParams",
    "FilterState",
    "GridTransition",
    "SurvivalModel",
    "TrackEstimate",
    "Transition",
    "TruncationCaps",
    "predict",
    "resample_clouds",
    "RngStage",
    "RngStreams",
    "effective_sample_size",
    "systematic_indices",
    "systematic_resample",
    "extract_tracks",
    "generic_update",
    "grid_joint",
    "separable_update_path",
]

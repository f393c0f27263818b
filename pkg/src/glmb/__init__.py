"""
delta-GLMB / LMB density algebra.
"""

from src.glmb.densities import (
    WEIGHT_TOLERANCE,
    DegeneratePosteriorError,
    DensityError,
    DiscreteGridDensity,
    EnumerationLimitError,
    ParticleCloud,
    SingleObjectDensity,
    WeightedPointDensity,
    mix,
)
from src.glmb.dglmb import (
    DEFAULT_MAX_LMB_TRACKS,
    CardinalityDistribution,
    DGlmbComponent,
    DGlmbDensity,
    GlmbLike,
    LabeledPhd,
    LmbDensity,
    LmbTrack,
    cardinality,
    expected_cardinality,
    from_log_weights,
    lmb_to_dglmb,
    lmb_weight,
    normalize,
    phd,
    truncate,
    unlabeled_phd,
)

__all__ = [
    "WEIGHT_TOLERANCE",
    "DEFAULT_MAX_LMB_TRACKS",
    "DensityError",
    "DegeneratePosteriorError",
    "EnumerationLimitError",
    "WeightedPointDensity",
    "ParticleCloud",
    "DiscreteGridDensity",
    "SingleObjectDensity",
    "mix",
    "DGlmbComponent",
    "DGlmbDensity",
    "GlmbLike",
    "LmbTrack",
    "LmbDensity",
    "CardinalityDistribution",
    "LabeledPhd",
    "cardinality",
    "expected_cardinality",
    "phd",
    "unlabeled_phd",
    "lmb_weight",
    "lmb_to_dglmb",
    "normalize",
    "from_log_weights",
    "truncate",
]

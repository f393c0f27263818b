"""
Approximations of labeled multi-object densities by delta-GLMBs:
separable conjugate update, marginal-product approximation and its
mixture form.
"""

from src.approx.joint import (
    DECOMPOSE_TOLERANCE,
    JointDensity,
    LabeledJointDensity,
    decompose,
    marginal_product_approx,
)
from src.approx.mixture import (
    GlmbMixture,
    MixtureTerm,
    merge_by_label_set,
    mixture_marginal_approx,
)
from src.approx.separable import (
    LogGamma,
    MultiObjectLogLikelihood,
    SeparableLikelihood,
    separable_update,
)

__all__ = [
    "DECOMPOSE_TOLERANCE",
    "JointDensity",
    "LabeledJointDensity",
    "decompose",
    "marginal_product_approx",
    "GlmbMixture",
    "MixtureTerm",
    "merge_by_label_set",
    "mixture_marginal_approx",
    "LogGamma",
    "MultiObjectLogLikelihood",
    "SeparableLikelihood",
    "separable_update",
]

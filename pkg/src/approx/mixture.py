"""
Mixture form of the marginal-product approximation.

A density pi(X) = sum_c w^(c)(L(X)) p^(c)(X) is approximated term by term:
component (c, I) keeps weight w^(c)(I) and the marginals of p^(c)(. | I).
Components of different c may share a label set, so the result is a
general GLMB. `merge_by_label_set` collapses it to a strict delta-GLMB.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple, Union

from src.core.labels import LabelSet
from src.glmb.densities import WEIGHT_TOLERANCE, DegeneratePosteriorError, DensityError, mix
from src.glmb.dglmb import DGlmbComponent, DGlmbDensity
from src.approx.joint import JointDensity, LabeledJointDensity

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MixtureTerm:
    """One index c: unnormalized weights w^(c)(L) and joints p^(c)(. | L)"""

    index: int
    existence_weights: Mapping[LabelSet, float]
    joints: Mapping[LabelSet, JointDensity]

    def as_joint(self) -> LabeledJointDensity:
        return LabeledJointDensity(self.existence_weights, self.joints, require_normalized=False)


@dataclass(frozen=True)
class GlmbMixture:
    """General GLMB: (index, component) pairs, label sets may repeat across indices"""

    terms: Tuple[Tuple[int, DGlmbComponent], ...]

    @property
    def components(self) -> Tuple[DGlmbComponent, ...]:
        return tuple(component for _, component in self.terms)

    @property
    def total_weight(self) -> float:
        return math.fsum(c.weight for c in self.components)

    def __len__(self) -> int:
        return len(self.terms)


def mixture_marginal_approx(
    terms: Sequence[MixtureTerm], merge: bool = False
) -> Union[GlmbMixture, DGlmbDensity]:
    """
    Approximate each (c, I) by the product of marginals of p^(c)(. | I).

    Args:
        terms: mixture terms whose weights sum to 1 over all (c, L)
        merge: collapse components sharing a label set into a delta-GLMB

    Raises:
        DensityError: if the weights over (c, L) do not sum to 1
    """
    total = math.fsum(w for term in terms for w in term.existence_weights.values())
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise DensityError(f"mixture weights sum to {total!r}, expected 1")

    out: List[Tuple[int, DGlmbComponent]] = []
    for term in sorted(terms, key=lambda t: t.index):
        joint = term.as_joint()
        for label_set, density in joint.joints.items():
            out.append(
                (term.index, DGlmbComponent(label_set, joint.existence_weights[label_set], density.marginals()))
            )

    mixture = GlmbMixture(tuple(out))
    return merge_by_label_set(mixture) if merge else mixture


def merge_by_label_set(mixture: GlmbMixture) -> DGlmbDensity:
    """
    Sum the weights of components sharing a label set and replace their
    per-label densities by the weight-averaged mixture.
    """
    groups: Dict[LabelSet, List[DGlmbComponent]] = {}
    for component in mixture.components:
        if component.weight > 0:
            groups.setdefault(component.label_set, []).append(component)
    if not groups:
        raise DegeneratePosteriorError("mixture has no component with positive weight")

    merged = []
    for label_set in sorted(groups):
        group = groups[label_set]
        weights = [c.weight for c in group]
        densities = {
            label: mix([c.densities[label] for c in group], weights) for label in label_set
        }
        merged.append(DGlmbComponent(label_set, math.fsum(weights), densities))

    if len(merged) < len(mixture):
        logger.debug(f"Merged general GLMB: {len(mixture)} -> {len(merged)} components")
    return DGlmbDensity(merged, require_normalized=False)

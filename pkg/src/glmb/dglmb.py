"""
delta-GLMB and LMB densities and their statistics.

A delta-GLMB is a list of (label set, weight, per-label densities) with one
term per label set. Statistics (cardinality, labeled PHD) are computed from
any object exposing `.components` with that shape, so the transient general
GLMB mixtures built in src.approx share the same code.
"""

import heapq
import logging
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from src.core.labels import Label, LabelSet
from src.glmb.densities import (
    WEIGHT_TOLERANCE,
    DegeneratePosteriorError,
    DensityError,
    EnumerationLimitError,
    SingleObjectDensity,
    mix,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_LMB_TRACKS = 20
PHD_MASS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DGlmbComponent:
    """One hypothesis: label set, weight and a density per label"""

    label_set: LabelSet
    weight: float
    densities: Mapping[Label, SingleObjectDensity]

    def __post_init__(self):
        if not isinstance(self.label_set, LabelSet):
            object.__setattr__(self, "label_set", LabelSet(self.label_set))
        if not np.isfinite(self.weight) or self.weight < 0:
            raise DensityError(f"component weight must be finite and >= 0, got {self.weight}")
        if set(self.densities.keys()) != set(self.label_set):
            raise DensityError(
                f"density keys {sorted(self.densities.keys())} do not match {self.label_set}"
            )
        ordered = {label: self.densities[label] for label in self.label_set}
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "densities", MappingProxyType(ordered))

    def with_weight(self, weight: float) -> "DGlmbComponent":
        return DGlmbComponent(self.label_set, weight, dict(self.densities))

    @property
    def cardinality(self) -> int:
        return len(self.label_set)


class GlmbLike(Protocol):
    """Anything carrying (label_set, weight, densities) components"""

    @property
    def components(self) -> Sequence[DGlmbComponent]: ...


class DGlmbDensity:
    """
    delta-GLMB density: at most one component per label set.

    Weights must sum to 1 unless require_normalized=False (used for
    intermediate, not-yet-normalized results that go through normalize()).
    """

    def __init__(self, components: Iterable[DGlmbComponent], require_normalized: bool = True):
        components = tuple(components)
        if not components:
            raise DensityError("a delta-GLMB needs at least one component")

        seen = set()
        for component in components:
            if component.label_set in seen:
                raise DensityError(f"duplicate label set {component.label_set}")
            seen.add(component.label_set)

        self._components = components
        if require_normalized:
            total = self.total_weight
            if abs(total - 1.0) > WEIGHT_TOLERANCE:
                raise DensityError(f"component weights sum to {total!r}, expected 1")

    @property
    def components(self) -> Tuple[DGlmbComponent, ...]:
        return self._components

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self._components])

    @property
    def total_weight(self) -> float:
        return float(sum(c.weight for c in self._components))

    def __len__(self) -> int:
        return len(self._components)

    def __iter__(self) -> Iterator[DGlmbComponent]:
        return iter(self._components)

    def component(self, label_set: LabelSet) -> Optional[DGlmbComponent]:
        for c in self._components:
            if c.label_set == label_set:
                return c
        return None

    def labels(self) -> LabelSet:
        return LabelSet(label for c in self._components for label in c.label_set)

    def __repr__(self) -> str:
        return f"DGlmbDensity(components={len(self._components)}, labels={len(self.labels())})"


@dataclass(frozen=True)
class LmbTrack:
    existence: float
    density: SingleObjectDensity

    def __post_init__(self):
        if not 0.0 <= self.existence <= 1.0:
            raise DensityError(f"existence probability must be in [0, 1], got {self.existence}")


@dataclass(frozen=True)
class LmbDensity:
    """Labeled multi-Bernoulli: independent tracks with existence probabilities"""

    tracks: Mapping[Label, LmbTrack]

    def __post_init__(self):
        ordered = {label: self.tracks[label] for label in sorted(self.tracks)}
        object.__setattr__(self, "tracks", MappingProxyType(ordered))

    @property
    def labels(self) -> LabelSet:
        return LabelSet(self.tracks.keys())


@dataclass(frozen=True)
class CardinalityDistribution:
    """rho(n) for n = 0..n_max"""

    masses: np.ndarray

    def __post_init__(self):
        masses = np.array(self.masses, dtype=float).reshape(-1)
        if masses.size == 0 or np.any(masses < -WEIGHT_TOLERANCE):
            raise DensityError("cardinality masses must be non-empty and non-negative")
        if abs(masses.sum() - 1.0) > WEIGHT_TOLERANCE:
            raise DensityError(f"cardinality masses sum to {masses.sum()!r}, expected 1")
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)

    @property
    def n_max(self) -> int:
        return self.masses.shape[0] - 1

    def __getitem__(self, n: int) -> float:
        return float(self.masses[n]) if 0 <= n <= self.n_max else 0.0

    def mean(self) -> float:
        return float(np.arange(self.masses.shape[0]) @ self.masses)

    def variance(self) -> float:
        n = np.arange(self.masses.shape[0])
        return float((n**2) @ self.masses - self.mean() ** 2)

    def map_estimate(self) -> int:
        """argmax, lowest n on ties"""
        return int(np.argmax(self.masses))


@dataclass(frozen=True)
class LabeledPhd:
    """Per-label existence mass and the normalized density it scales"""

    masses: Mapping[Label, float]
    densities: Mapping[Label, SingleObjectDensity]

    def __post_init__(self):
        for label, mass in self.masses.items():
            if mass < -PHD_MASS_TOLERANCE or mass > 1.0 + PHD_MASS_TOLERANCE:
                raise DensityError(f"PHD mass of {label} outside [0, 1]: {mass}")
        object.__setattr__(self, "masses", MappingProxyType(dict(sorted(self.masses.items()))))
        object.__setattr__(self, "densities", MappingProxyType(dict(sorted(self.densities.items()))))

    def mass(self, label: Label) -> float:
        return float(self.masses.get(label, 0.0))

    def total_mass(self) -> float:
        return float(sum(self.masses.values()))

    def intensity(self, label: Label) -> np.ndarray:
        """v(x, label) at the points of the label's density"""
        return self.mass(label) * self.densities[label].weights


# =======================
# Statistics
# =======================


def cardinality(d: GlmbLike) -> CardinalityDistribution:
    """rho(n) = sum of weights of components whose label set has n labels"""
    n_max = max(len(c.label_set) for c in d.components)
    masses = np.zeros(n_max + 1)
    for c in d.components:
        masses[len(c.label_set)] += c.weight
    return CardinalityDistribution(masses)


def expected_cardinality(d: GlmbLike) -> float:
    return cardinality(d).mean()


def phd(d: GlmbLike) -> LabeledPhd:
    """v(., l) = sum over label sets containing l of w^(L) p^(L)(., l)"""
    contributions: Dict[Label, List[Tuple[SingleObjectDensity, float]]] = {}
    for c in d.components:
        for label, density in c.densities.items():
            contributions.setdefault(label, []).append((density, c.weight))

    masses: Dict[Label, float] = {}
    densities: Dict[Label, SingleObjectDensity] = {}
    for label, parts in contributions.items():
        mass = float(sum(w for _, w in parts))
        masses[label] = mass
        if mass > 0:
            densities[label] = mix([p for p, _ in parts], [w for _, w in parts])
        else:
            densities[label] = parts[0][0]
    return LabeledPhd(masses, densities)


def unlabeled_phd(d: GlmbLike) -> Tuple[float, Optional[SingleObjectDensity]]:
    """
    Unlabeled PHD v(x) = sum_l v(x, l), as (total mass, normalized density).

    The density is None when the expected number of objects is zero.
    """
    labeled = phd(d)
    total = labeled.total_mass()
    if total <= 0:
        return 0.0, None
    labels = [l for l in labeled.masses if labeled.masses[l] > 0]
    return total, mix([labeled.densities[l] for l in labels], [labeled.masses[l] for l in labels])


# =======================
# LMB
# =======================


def lmb_weight(lmb: LmbDensity, labels: LabelSet) -> float:
    """
    LMB weight of a label set: prod_{l in L} r_l * prod_{l not in L} (1 - r_l).

    Evaluated in the log domain; r = 1 makes every set omitting that track
    weigh exactly 0, r = 0 does the same for every set containing it.
    """
    if not all(label in lmb.tracks for label in labels):
        return 0.0
    log_w = 0.0
    with np.errstate(divide="ignore"):
        for label, track in lmb.tracks.items():
            if label in labels:
                log_w += np.log(track.existence)
            else:
                log_w += np.log1p(-track.existence)
    return float(np.exp(log_w))


def lmb_to_dglmb(lmb: LmbDensity, max_tracks: int = DEFAULT_MAX_LMB_TRACKS) -> DGlmbDensity:
    """Expand an LMB into its delta-GLMB form, one component per subset of tracks"""
    n_tracks = len(lmb.tracks)
    if n_tracks > max_tracks:
        raise EnumerationLimitError(
            f"LMB with {n_tracks} tracks expands to 2^{n_tracks} components "
            f"(cap is {max_tracks} tracks)"
        )

    components = []
    for subset in lmb.labels.subsets():
        densities = {label: lmb.tracks[label].density for label in subset}
        components.append(DGlmbComponent(subset, lmb_weight(lmb, subset), densities))
    return normalize(DGlmbDensity(components, require_normalized=False))


# =======================
# Normalization / truncation
# =======================


def normalize(d: DGlmbDensity) -> DGlmbDensity:
    """Divide weights by their sum; densities untouched"""
    total = d.total_weight
    if not np.isfinite(total) or total <= 0:
        raise DegeneratePosteriorError("all component weights are zero (degenerate posterior)")
    return DGlmbDensity(c.with_weight(c.weight / total) for c in d.components)


def from_log_weights(
    entries: Sequence[Tuple[LabelSet, float, Mapping[Label, SingleObjectDensity]]],
) -> DGlmbDensity:
    """
    Build a normalized delta-GLMB from (label set, log weight, densities).

    Components with log weight -inf are dropped; if nothing survives the
    posterior is degenerate.
    """
    log_weights = np.array([entry[1] for entry in entries], dtype=float)
    if log_weights.size == 0 or not np.any(np.isfinite(log_weights)):
        raise DegeneratePosteriorError("every hypothesis has zero likelihood")
    log_total = logsumexp(log_weights)
    components = [
        DGlmbComponent(label_set, float(np.exp(log_w - log_total)), densities)
        for (label_set, _, densities), log_w in zip(entries, log_weights)
        if np.isfinite(log_w)
    ]
    return normalize(DGlmbDensity(components, require_normalized=False))


def _truncation_order(c: DGlmbComponent):
    return (-c.weight, c.label_set.sort_key())


def truncate(d: DGlmbDensity, max_components: int, min_weight: float = 0.0) -> DGlmbDensity:
    """
    Keep the max_components heaviest components with weight >= min_weight
    (ties by canonical label-set order), then renormalize. The heaviest
    component is always kept.
    """
    if max_components < 1:
        raise DensityError(f"max_components must be >= 1, got {max_components}")

    ranked = heapq.nsmallest(max_components, d.components, key=_truncation_order)
    kept = [c for c in ranked if c.weight >= min_weight] or ranked[:1]

    if len(kept) < len(d.components):
        logger.debug(
            f"Truncated delta-GLMB: {len(d.components)} -> {len(kept)} components",
            extra={"n_components": len(kept)},
        )
    return normalize(DGlmbDensity(kept, require_normalized=False))

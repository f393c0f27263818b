"""
Exhaustive labeled-set engine on small discrete spaces.

A DiscreteInstance stores a labeled multi-object density on label_space x
grid as an explicit mass per labeled set. A labeled set is keyed by its
canonical form: a tuple of (Label, grid index) pairs sorted by label, so
each unordered set is enumerated exactly once and the 1/n! factor of the
set integral never appears.
"""

import logging
import math
from itertools import combinations, product
from typing import Callable, Dict, Iterator, Mapping, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from src.core.labels import Label, LabelSet
from src.glmb.densities import DiscreteGridDensity
from src.glmb.dglmb import CardinalityDistribution, DGlmbDensity

logger = logging.getLogger(__name__)

MAX_ORACLE_LABELS = 3
MAX_ORACLE_POINTS = 6
ORACLE_TOLERANCE = 1e-9

LabeledSetKey = Tuple[Tuple[Label, int], ...]


class OracleLimitError(Exception):
    """Raised when an instance exceeds the enumerable label/grid caps"""
    pass


class OracleNormalizationError(Exception):
    """Raised when an instance or Bayes normalizer is not a valid probability"""
    pass


def key_labels(key: LabeledSetKey) -> Tuple[Label, ...]:
    return tuple(label for label, _ in key)


def key_indices(key: LabeledSetKey) -> Tuple[int, ...]:
    return tuple(index for _, index in key)


class DiscreteInstance:
    """Labeled multi-object density with explicit mass on every labeled set"""

    def __init__(
        self,
        label_space: LabelSet,
        grid: np.ndarray,
        masses: Mapping[LabeledSetKey, float],
        require_normalized: bool = True,
    ):
        label_space = LabelSet(label_space)
        grid = np.array(grid, dtype=float)
        if grid.ndim == 1:
            grid = grid[:, None]
        if len(label_space) > MAX_ORACLE_LABELS:
            raise OracleLimitError(
                f"{len(label_space)} labels exceeds the oracle cap of {MAX_ORACLE_LABELS}"
            )
        if grid.shape[0] == 0 or grid.shape[0] > MAX_ORACLE_POINTS:
            raise OracleLimitError(
                f"{grid.shape[0]} grid points outside the oracle range 1..{MAX_ORACLE_POINTS}"
            )

        clean: Dict[LabeledSetKey, float] = {}
        for key, mass in masses.items():
            key = tuple(key)
            self._check_key(key, label_space, grid.shape[0])
            if not np.isfinite(mass) or mass < 0:
                raise OracleNormalizationError(f"mass of {key} must be finite and >= 0, got {mass}")
            if mass > 0:
                clean[key] = float(mass)

        grid.setflags(write=False)
        self.label_space = label_space
        self.grid = grid
        self._masses = clean

        if require_normalized:
            total = self.total_mass()
            if abs(total - 1.0) > ORACLE_TOLERANCE:
                raise OracleNormalizationError(f"instance masses sum to {total!r}, expected 1")

    @staticmethod
    def _check_key(key: LabeledSetKey, label_space: LabelSet, n_points: int):
        labels = key_labels(key)
        if list(labels) != sorted(set(labels)):
            raise OracleNormalizationError(
                f"labeled set {key} must have distinct labels in canonical order"
            )
        for label, index in key:
            if label not in label_space:
                raise OracleNormalizationError(f"{label} is not in the label space")
            if not 0 <= index < n_points:
                raise OracleNormalizationError(f"grid index {index} out of range")

    @property
    def masses(self) -> Mapping[LabeledSetKey, float]:
        return self._masses

    @property
    def n_points(self) -> int:
        return self.grid.shape[0]

    def mass(self, key: LabeledSetKey) -> float:
        return self._masses.get(tuple(key), 0.0)

    def total_mass(self) -> float:
        return float(math.fsum(self._masses.values()))

    def points(self, key: LabeledSetKey) -> np.ndarray:
        """(n, d) kinematic points of a labeled set"""
        return self.grid[list(key_indices(key))].reshape(len(key), self.grid.shape[1])

    def same_space(self, other: "DiscreteInstance") -> bool:
        return self.label_space == other.label_space and np.array_equal(self.grid, other.grid)

    def __repr__(self) -> str:
        return (
            f"DiscreteInstance(labels={len(self.label_space)}, points={self.n_points}, "
            f"support={len(self._masses)})"
        )


def enumerate_sets(label_space: LabelSet, n_points: int) -> Iterator[LabeledSetKey]:
    """Every distinct-label set over label_space x grid, by size then canonical order"""
    for size in range(len(label_space) + 1):
        for labels in combinations(label_space.labels, size):
            for indices in product(range(n_points), repeat=size):
                yield tuple(zip(labels, indices))


def set_integral(f: Callable[[LabeledSetKey, np.ndarray], float], inst: DiscreteInstance) -> float:
    """
    Set integral of f against the instance density: sum_X f(X) pi(X).

    f receives the canonical key and the (n, d) points of each labeled set.
    Sets with zero mass are skipped.
    """
    return float(math.fsum(f(key, inst.points(key)) * mass for key, mass in inst.masses.items()))


def exact_bayes(prior: DiscreteInstance, log_likelihood) -> DiscreteInstance:
    """
    Posterior masses pi(X) g(X) / integral of g pi, by enumeration.

    log_likelihood follows the multi-object convention
    (labels, points[N, n, d]) -> log g [N], called once per labeled set.

    Raises:
        OracleNormalizationError: if the normalizer is zero
    """
    keys = list(prior.masses.keys())
    log_terms = np.empty(len(keys))
    for j, key in enumerate(keys):
        log_g = np.asarray(log_likelihood(key_labels(key), prior.points(key)[None]), dtype=float)
        log_terms[j] = np.log(prior.masses[key]) + float(log_g.reshape(-1)[0])

    if not keys or not np.any(np.isfinite(log_terms)):
        raise OracleNormalizationError("Bayes normalizer is zero")
    log_norm = logsumexp(log_terms)
    posterior = {key: float(np.exp(t - log_norm)) for key, t in zip(keys, log_terms)}
    return DiscreteInstance(prior.label_space, prior.grid, posterior)


def kld(p: DiscreteInstance, q: DiscreteInstance) -> float:
    """
    D_KL(p || q) over all labeled sets.

    Sets where p has no mass contribute 0; math.inf flags mass of p where q
    has none.
    """
    if not p.same_space(q):
        raise OracleLimitError("kld needs instances on the same label space and grid")
    terms = []
    for key, p_mass in p.masses.items():
        q_mass = q.mass(key)
        if q_mass <= 0:
            return math.inf
        terms.append(p_mass * (math.log(p_mass) - math.log(q_mass)))
    return float(math.fsum(terms))


def cardinality(inst: DiscreteInstance) -> CardinalityDistribution:
    masses = np.zeros(len(inst.label_space) + 1)
    for key, mass in inst.masses.items():
        masses[len(key)] += mass
    return CardinalityDistribution(masses)


def phd(inst: DiscreteInstance) -> Dict[Label, np.ndarray]:
    """v(x_g, l) at every grid point for every label of the space"""
    out = {label: np.zeros(inst.n_points) for label in inst.label_space}
    for key, mass in inst.masses.items():
        for label, index in key:
            out[label][index] += mass
    return out


def from_dglmb(
    d: DGlmbDensity, grid: np.ndarray, label_space: Optional[LabelSet] = None
) -> DiscreteInstance:
    """
    Expand a delta-GLMB whose densities all live on `grid` into explicit
    labeled-set masses w(L) prod_l p(x_l, l).
    """
    grid = np.array(grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[:, None]
    if label_space is None:
        label_space = d.labels()

    masses: Dict[LabeledSetKey, float] = {}
    for component in d.components:
        labels = component.label_set.labels
        tables = []
        for label in labels:
            density = component.densities[label]
            if not isinstance(density, DiscreteGridDensity) or not np.array_equal(density.grid, grid):
                raise OracleLimitError(f"density of {label} is not on the oracle grid")
            tables.append(density.masses)
        for indices in product(range(grid.shape[0]), repeat=len(labels)):
            value = component.weight
            for table, index in zip(tables, indices):
                value *= table[index]
            masses[tuple(zip(labels, indices))] = value
    return DiscreteInstance(label_space, grid, masses)

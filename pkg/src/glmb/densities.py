"""
Single-object densities.

Both representations are weighted point sets over the kinematic space:
- ParticleCloud: Monte Carlo samples with normalized weights
- DiscreteGridDensity: exact probability masses on an explicit finite grid

The grid form exists so that set integrals can be evaluated exactly on small
instances; all filter arithmetic works on either form.
"""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

logger = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-9


class DensityError(Exception):
    """Raised when a density violates its invariants"""
    pass


class DegeneratePosteriorError(DensityError):
    """Raised when every hypothesis ends up with zero posterior weight"""
    pass


class EnumerationLimitError(DensityError):
    """Raised when an exhaustive enumeration would exceed its cap"""
    pass


class WeightedPointDensity:
    """Normalized weights over a finite set of kinematic points"""

    __slots__ = ("_points", "_weights")

    def __init__(self, points, weights=None, normalize: bool = False):
        points = np.array(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or points.shape[0] == 0:
            raise DensityError(f"points must be a non-empty (N, d) array, got shape {points.shape}")

        if weights is None:
            weights = np.full(points.shape[0], 1.0 / points.shape[0])
        weights = np.array(weights, dtype=float).reshape(-1)
        if weights.shape[0] != points.shape[0]:
            raise DensityError(
                f"{weights.shape[0]} weights for {points.shape[0]} points"
            )
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise DensityError("weights must be finite and non-negative")

        total = weights.sum()
        if normalize:
            if total <= 0:
                raise DegeneratePosteriorError("cannot normalize an all-zero weight vector")
            weights = weights / total
        elif abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise DensityError(f"weights sum to {total!r}, expected 1")

        points.setflags(write=False)
        weights.setflags(write=False)
        self._points = points
        self._weights = weights

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def size(self) -> int:
        return self._points.shape[0]

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    def mean(self) -> np.ndarray:
        return self._weights @ self._points

    def expectation(self, values: np.ndarray) -> float:
        """<p, f> for f evaluated at every point"""
        return float(self._weights @ np.asarray(values, dtype=float))

    def is_uniform(self) -> bool:
        return bool(np.allclose(self._weights, 1.0 / self.size, rtol=0.0, atol=1e-15))

    def with_weights(self, weights, normalize: bool = True):
        return type(self)(self._points, weights, normalize=normalize)

    def reweight_log(self, log_values: np.ndarray) -> Tuple[Optional["WeightedPointDensity"], float]:
        """
        Bayes-reweight by exp(log_values).

        Returns:
            (posterior density or None when the likelihood mass is zero,
             log <p, exp(log_values)>)
        """
        log_values = np.asarray(log_values, dtype=float)
        with np.errstate(divide="ignore"):
            log_joint = np.log(self._weights) + log_values
            log_eta = float(logsumexp(log_joint))
        if not np.isfinite(log_eta):
            return None, -np.inf
        return type(self)(self._points, np.exp(log_joint - log_eta), normalize=True), log_eta

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.size}, dim={self.dim})"


class ParticleCloud(WeightedPointDensity):
    """Weighted Monte Carlo samples of one label's kinematic state"""

    __slots__ = ()


class DiscreteGridDensity(WeightedPointDensity):
    """Probability masses over an explicit finite grid of kinematic points"""

    __slots__ = ()

    @property
    def grid(self) -> np.ndarray:
        return self._points

    @property
    def masses(self) -> np.ndarray:
        return self._weights

    def same_grid(self, other: "DiscreteGridDensity") -> bool:
        return isinstance(other, DiscreteGridDensity) and np.array_equal(self.grid, other.grid)


SingleObjectDensity = Union[ParticleCloud, DiscreteGridDensity]


def mix(densities: Sequence[WeightedPointDensity], weights: Sequence[float]) -> WeightedPointDensity:
    """
    Weighted mixture sum_i w_i p_i / sum_i w_i.

    Grid densities on a common grid are summed cell by cell (exact); any other
    combination is concatenated into one particle cloud.
    """
    weights = np.asarray(weights, dtype=float)
    if len(densities) != weights.shape[0] or len(densities) == 0:
        raise DensityError("mix needs one weight per density and at least one density")
    total = weights.sum()
    if total <= 0:
        raise DegeneratePosteriorError("mixture weights sum to zero")

    kept = [(d, w) for d, w in zip(densities, weights) if w > 0]
    if len(kept) == 1:
        return kept[0][0]

    first = kept[0][0]
    if isinstance(first, DiscreteGridDensity) and all(first.same_grid(d) for d, _ in kept):
        masses = sum(w * d.masses for d, w in kept) / total
        return DiscreteGridDensity(first.grid, masses, normalize=True)

    points = np.concatenate([d.points for d, _ in kept], axis=0)
    mixed = np.concatenate([w * d.weights for d, w in kept]) / total
    return ParticleCloud(points, mixed, normalize=True)

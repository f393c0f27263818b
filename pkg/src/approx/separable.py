"""
Conjugate update of a delta-GLMB under a separable likelihood.

With g(z|X) = prod_{(x,l) in X} gamma_z(x, l) the posterior is again a
delta-GLMB: each component weight picks up prod_l eta_z(l) and every
per-label density is Bayes-reweighted on its own.
"""

import logging
from typing import Callable, Dict, Tuple

import numpy as np

from src.core.labels import Label
from src.glmb.densities import DegeneratePosteriorError, SingleObjectDensity
from src.glmb.dglmb import DGlmbDensity, from_log_weights

logger = logging.getLogger(__name__)

# (labels in canonical order, joint points [N, n, d]) -> log-likelihood [N]
MultiObjectLogLikelihood = Callable[[Tuple[Label, ...], np.ndarray], np.ndarray]

# (points [N, d], label) -> log gamma [N]
LogGamma = Callable[[np.ndarray, Label], np.ndarray]


class SeparableLikelihood:
    """
    Separable multi-object likelihood built from a per-object log gamma.

    Calling it with joint samples returns the multi-object log-likelihood,
    sum_i log gamma(x_i, l_i), so it can be used anywhere a generic
    likelihood is expected.
    """

    def __init__(self, log_gamma: LogGamma):
        self.log_gamma = log_gamma

    @classmethod
    def from_gamma(cls, gamma: Callable[[np.ndarray, Label], np.ndarray]) -> "SeparableLikelihood":
        """Wrap a linear-domain gamma (values must be >= 0)"""

        def log_gamma(points: np.ndarray, label: Label) -> np.ndarray:
            values = np.asarray(gamma(points, label), dtype=float)
            if np.any(values < 0):
                raise ValueError(f"gamma must be non-negative (label {label})")
            with np.errstate(divide="ignore"):
                return np.log(values)

        return cls(log_gamma)

    def evaluate(self, points: np.ndarray, label: Label) -> np.ndarray:
        values = np.asarray(self.log_gamma(np.asarray(points, dtype=float), label), dtype=float)
        return values.reshape(-1)

    def __call__(self, labels: Tuple[Label, ...], points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        total = np.zeros(points.shape[0])
        for i, label in enumerate(labels):
            total = total + self.evaluate(points[:, i, :], label)
        return total


def separable_update(prior: DGlmbDensity, likelihood: SeparableLikelihood) -> DGlmbDensity:
    """
    Exact posterior of a delta-GLMB under a separable likelihood.

    Components whose weight or likelihood mass is zero are dropped.

    Raises:
        DegeneratePosteriorError: if every component ends with zero weight
    """
    # Components frequently share the same density object for a label.
    cache: Dict[Tuple[int, Label], Tuple[SingleObjectDensity, float]] = {}

    def posterior_of(density: SingleObjectDensity, label: Label):
        key = (id(density), label)
        if key not in cache:
            cache[key] = density.reweight_log(likelihood.evaluate(density.points, label))
        return cache[key]

    entries = []
    for component in prior.components:
        if component.weight <= 0:
            continue
        log_weight = float(np.log(component.weight))
        densities = {}
        for label, density in component.densities.items():
            updated, log_eta = posterior_of(density, label)
            if updated is None:
                log_weight = -np.inf
                break
            log_weight += log_eta
            densities[label] = updated
        if np.isfinite(log_weight):
            entries.append((component.label_set, log_weight, densities))

    if not entries:
        raise DegeneratePosteriorError("separable update: every component has zero likelihood")

    posterior = from_log_weights(entries)
    logger.debug(
        f"Separable update: {len(prior)} -> {len(posterior)} components",
        extra={"n_components": len(posterior)},
    )
    return posterior

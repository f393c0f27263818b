"""
Sequential Monte Carlo machinery: seeded random streams, systematic
resampling and the effective sample size diagnostic.
"""

from enum import IntEnum
from typing import Optional

import numpy as np

from src.core.labels import Label
from src.glmb.densities import ParticleCloud, WeightedPointDensity


class RngStage(IntEnum):
    TRUTH = 0
    FRAME = 1
    BIRTH = 2
    PROPAGATE = 3
    PREDICT_RESAMPLE = 4
    UPDATE_RESAMPLE = 5
    PAIRING = 6


class RngStreams:
    """
    Independent generators keyed by (seed, trial, time, stage, component, label).

    Every consumer asks for the stream of its own key, so results do not
    depend on the order in which trials, components or labels are processed.
    """

    def __init__(self, seed: int, trial: int = 0):
        if seed < 0 or trial < 0:
            raise ValueError(f"seed and trial must be >= 0, got {seed}, {trial}")
        self.seed = int(seed)
        self.trial = int(trial)

    def generator(
        self,
        time: int,
        stage: RngStage,
        component: int = 0,
        label: Optional[Label] = None,
    ) -> np.random.Generator:
        if label is None:
            label_key = [0, 0, 0]
        else:
            label_key = [1, label.birth_time, label.index]
        entropy = [self.seed, self.trial, int(time), int(stage), int(component), *label_key]
        return np.random.default_rng(np.random.SeedSequence(entropy))

    def __repr__(self) -> str:
        return f"RngStreams(seed={self.seed}, trial={self.trial})"


def systematic_indices(weights: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """n ancestor indices with a single uniform offset"""
    weights = np.asarray(weights, dtype=float)
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0  # avoid round-off error
    positions = (rng.random() + np.arange(n)) / n
    return np.searchsorted(cumulative, positions, side="right")


def systematic_resample(
    density: WeightedPointDensity, n: int, rng: np.random.Generator
) -> ParticleCloud:
    """Equally weighted cloud of n particles drawn systematically from `density`"""
    if n < 1:
        raise ValueError(f"resample size must be >= 1, got {n}")
    indices = systematic_indices(density.weights, n, rng)
    return ParticleCloud(density.points[indices])


def effective_sample_size(cloud: WeightedPointDensity) -> float:
    return float(1.0 / np.sum(cloud.weights ** 2))

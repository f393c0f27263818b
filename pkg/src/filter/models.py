"""
Filter state, birth / survival models and tuning parameters.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Mapping, Optional, Protocol, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from src.core.labels import EMPTY_LABEL_SET, Label, LabelError
from src.glmb.densities import (
    DegeneratePosteriorError,
    DensityError,
    DiscreteGridDensity,
    SingleObjectDensity,
)
from src.glmb.dglmb import DGlmbComponent, DGlmbDensity, LmbDensity, LmbTrack

logger = logging.getLogger(__name__)


class DegenerateUpdateError(DegeneratePosteriorError):
    """Raised when every hypothesis has zero likelihood after an update"""
    pass


class TruncationCaps(BaseModel):
    """Component caps applied after every predict and update"""

    max_components: int = Field(100, ge=1)
    min_weight: float = Field(1e-5, ge=0.0, lt=1.0)


class FilterParams(BaseModel):
    n_particles: int = Field(1000, ge=1)
    caps: TruncationCaps = Field(default_factory=TruncationCaps)


@dataclass(frozen=True)
class FilterState:
    density: DGlmbDensity
    time: int
    label_space_used: FrozenSet[Label] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "label_space_used", frozenset(self.label_space_used))
        for component in self.density.components:
            if not component.label_set.issubset(self.label_space_used):
                raise LabelError(
                    f"{component.label_set} uses labels never allocated by time {self.time}"
                )

    @classmethod
    def initial(cls, time: int = 0) -> "FilterState":
        """No objects, certainly"""
        return cls(DGlmbDensity([DGlmbComponent(EMPTY_LABEL_SET, 1.0, {})]), time, frozenset())


@dataclass(frozen=True)
class TrackEstimate:
    label: Label
    time: int
    kinematic_mean: np.ndarray

    @property
    def position(self) -> np.ndarray:
        return self.kinematic_mean[[0, 2]]


class BirthModel:
    """LMB birth: every label born at the same step, each with (r_B, p_B)"""

    def __init__(self, births: Mapping[Label, Tuple[float, SingleObjectDensity]]):
        birth_times = {label.birth_time for label in births}
        if len(birth_times) > 1:
            raise LabelError(f"birth labels span several time steps: {sorted(birth_times)}")
        self.births = dict(sorted(births.items()))
        self.lmb = LmbDensity({label: LmbTrack(r, p) for label, (r, p) in self.births.items()})

    @classmethod
    def none(cls) -> "BirthModel":
        return cls({})

    @property
    def labels(self) -> Tuple[Label, ...]:
        return tuple(self.births.keys())

    @property
    def birth_time(self) -> Optional[int]:
        return self.labels[0].birth_time if self.births else None

    def existence(self, label: Label) -> float:
        return self.births[label][0]

    def density(self, label: Label) -> SingleObjectDensity:
        return self.births[label][1]


class Transition(Protocol):
    """Single-object Markov kernel applied to a whole density"""

    def propagate(
        self, density: SingleObjectDensity, label: Label, rng: np.random.Generator
    ) -> SingleObjectDensity: ...


class GridTransition:
    """Exact kernel on a finite grid: row i of `matrix` is P(next = j | current = i)"""

    def __init__(self, grid: np.ndarray, matrix: np.ndarray):
        grid = np.asarray(grid, dtype=float)
        self.grid = grid[:, None] if grid.ndim == 1 else grid
        matrix = np.asarray(matrix, dtype=float)
        n = self.grid.shape[0]
        if matrix.shape != (n, n):
            raise DensityError(f"transition matrix must be {n}x{n}, got {matrix.shape}")
        if np.any(matrix < 0) or not np.allclose(matrix.sum(axis=1), 1.0, atol=1e-12):
            raise DensityError("transition matrix rows must be probability vectors")
        self.matrix = matrix

    @classmethod
    def identity(cls, grid: np.ndarray) -> "GridTransition":
        n = np.asarray(grid).shape[0]
        return cls(grid, np.eye(n))

    def propagate(self, density, label, rng=None) -> DiscreteGridDensity:
        if not isinstance(density, DiscreteGridDensity) or not np.array_equal(density.grid, self.grid):
            raise DensityError(f"density of {label} is not on the transition grid")
        return DiscreteGridDensity(self.grid, density.masses @ self.matrix, normalize=True)


SurvivalProbability = Union[float, Callable[[np.ndarray, Label], np.ndarray]]


class SurvivalModel:
    """p_S(x, l) and the transition kernel of surviving objects"""

    def __init__(self, probability: SurvivalProbability, transition: Transition):
        if not callable(probability) and not 0.0 <= float(probability) <= 1.0:
            raise DensityError(f"survival probability must be in [0, 1], got {probability}")
        self.probability = probability
        self.transition = transition

    def survival_probability(self, points: np.ndarray, label: Label) -> np.ndarray:
        if callable(self.probability):
            values = np.asarray(self.probability(points, label), dtype=float).reshape(-1)
        else:
            values = np.full(points.shape[0], float(self.probability))
        if np.any(values < 0) or np.any(values > 1):
            raise DensityError(f"survival probability of {label} outside [0, 1]")
        return values

    def predict_density(
        self, density: SingleObjectDensity, label: Label, rng: np.random.Generator
    ) -> Tuple[Optional[SingleObjectDensity], float]:
        """
        Returns:
            (<p_S f, p> / eta_S or None when eta_S = 0, eta_S = <p, p_S>)
        """
        p_s = self.survival_probability(density.points, label)
        eta_s = min(1.0, density.expectation(p_s))
        if eta_s <= 0:
            return None, 0.0
        if np.all(p_s == p_s[0]):
            surviving = density
        else:
            surviving = density.with_weights(density.weights * p_s, normalize=True)
        return self.transition.propagate(surviving, label, rng), eta_s

"""
Random small instances for oracle-backed checks.
"""

from typing import Optional, Tuple

import numpy as np

from src.core.labels import Label, LabelSet
from src.glmb.densities import DiscreteGridDensity
from src.glmb.dglmb import DGlmbComponent, DGlmbDensity
from src.oracle.instance import (
    MAX_ORACLE_LABELS,
    MAX_ORACLE_POINTS,
    DiscreteInstance,
    OracleLimitError,
    enumerate_sets,
)


def default_label_space(n_labels: int) -> LabelSet:
    return LabelSet(Label(0, i) for i in range(n_labels))


def random_grid(rng: np.random.Generator, n_points: int, dim: int = 1) -> np.ndarray:
    if not 1 <= n_points <= MAX_ORACLE_POINTS:
        raise OracleLimitError(f"n_points must be in 1..{MAX_ORACLE_POINTS}, got {n_points}")
    # Sorted along the first coordinate only to make printed grids readable.
    grid = rng.normal(scale=10.0, size=(n_points, dim))
    return grid[np.argsort(grid[:, 0], kind="stable")]


def random_instance(
    rng: np.random.Generator,
    n_labels: int = 2,
    n_points: int = 4,
    dim: int = 1,
    grid: Optional[np.ndarray] = None,
) -> DiscreteInstance:
    """Arbitrary (generally correlated) labeled density with full support"""
    if not 0 <= n_labels <= MAX_ORACLE_LABELS:
        raise OracleLimitError(f"n_labels must be in 0..{MAX_ORACLE_LABELS}, got {n_labels}")
    label_space = default_label_space(n_labels)
    if grid is None:
        grid = random_grid(rng, n_points, dim)
    keys = list(enumerate_sets(label_space, np.asarray(grid).shape[0]))
    masses = rng.dirichlet(np.ones(len(keys)))
    return DiscreteInstance(label_space, grid, dict(zip(keys, masses / masses.sum())))


def random_grid_density(rng: np.random.Generator, grid: np.ndarray) -> DiscreteGridDensity:
    masses = rng.dirichlet(np.ones(np.asarray(grid).shape[0]))
    return DiscreteGridDensity(grid, masses, normalize=True)


def random_grid_dglmb(
    rng: np.random.Generator,
    n_labels: int = 2,
    n_points: int = 4,
    dim: int = 1,
    n_components: Optional[int] = None,
    grid: Optional[np.ndarray] = None,
) -> Tuple[DGlmbDensity, np.ndarray]:
    """
    Random delta-GLMB over Label(0, i), i < n_labels, with every per-label
    density a random grid density on a shared grid.

    Returns:
        (density, grid)
    """
    label_space = default_label_space(n_labels)
    if grid is None:
        grid = random_grid(rng, n_points, dim)
    all_sets = list(label_space.subsets())
    if n_components is None:
        n_components = len(all_sets)
    n_components = max(1, min(n_components, len(all_sets)))

    chosen = sorted(rng.choice(len(all_sets), size=n_components, replace=False))
    weights = rng.dirichlet(np.ones(n_components))
    weights = weights / weights.sum()
    components = [
        DGlmbComponent(
            all_sets[i],
            float(w),
            {label: random_grid_density(rng, grid) for label in all_sets[i]},
        )
        for i, w in zip(chosen, weights)
    ]
    return DGlmbDensity(components), grid

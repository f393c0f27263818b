"""
Labeled joint densities and the marginal-product delta-GLMB approximation.

Any labeled multi-object density factors as pi(X) = w(L(X)) p(X): a joint
existence probability over label sets times a kinematic joint density
conditional on the label set. Replacing each conditional joint by the
product of its marginals, with the weights left unchanged, gives the
delta-GLMB that keeps the cardinality distribution and PHD of pi and is
closest to it in Kullback-Leibler divergence among delta-GLMBs with those
weights.
"""

import logging
import math
from collections import defaultdict
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.core.labels import Label, LabelSet
from src.glmb.densities import (
    WEIGHT_TOLERANCE,
    DensityError,
    DiscreteGridDensity,
    ParticleCloud,
    SingleObjectDensity,
)
from src.glmb.dglmb import DGlmbComponent, DGlmbDensity
from src.oracle.instance import DiscreteInstance, key_indices, key_labels

logger = logging.getLogger(__name__)

DECOMPOSE_TOLERANCE = 1e-6


class JointDensity:
    """
    Weighted joint samples of the states of an ordered tuple of labels.

    samples has shape (N, n, d): sample j gives the n labels' states
    together. When the samples are points of a finite grid, `indices`
    (N, n) records which grid point each coordinate is, and marginals come
    out as exact grid densities.
    """

    def __init__(
        self,
        labels: Sequence[Label],
        samples: np.ndarray,
        weights: np.ndarray,
        grid: Optional[np.ndarray] = None,
        indices: Optional[np.ndarray] = None,
    ):
        self.labels = tuple(labels)
        if list(self.labels) != sorted(set(self.labels)):
            raise DensityError(f"joint labels must be distinct and canonical, got {self.labels}")
        samples = np.asarray(samples, dtype=float)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if samples.ndim != 3 or samples.shape[1] != len(self.labels):
            raise DensityError(
                f"samples must have shape (N, {len(self.labels)}, d), got {samples.shape}"
            )
        if weights.shape[0] != samples.shape[0] or weights.shape[0] == 0:
            raise DensityError("one weight per joint sample is required")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_TOLERANCE:
            raise DensityError(f"joint weights must be >= 0 and sum to 1, got {weights.sum()!r}")
        if (grid is None) != (indices is None):
            raise DensityError("grid and indices must be given together")

        self.samples = samples
        self.weights = weights
        self.grid = None if grid is None else np.asarray(grid, dtype=float)
        self.indices = None if indices is None else np.asarray(indices, dtype=int)

    @classmethod
    def on_grid(cls, labels: Sequence[Label], grid: np.ndarray, masses: np.ndarray) -> "JointDensity":
        """Joint given as an n-dimensional mass table over a shared grid"""
        grid = np.asarray(grid, dtype=float)
        if grid.ndim == 1:
            grid = grid[:, None]
        masses = np.asarray(masses, dtype=float)
        n = len(tuple(labels))
        if masses.shape != (grid.shape[0],) * n:
            raise DensityError(f"mass table shape {masses.shape} does not match {n} labels")
        indices = np.indices(masses.shape).reshape(n, -1).T
        flat = masses.reshape(-1)
        total = flat.sum()
        if total <= 0:
            raise DensityError("joint mass table is all zero")
        return cls(labels, grid[indices], flat / total, grid=grid, indices=indices)

    @classmethod
    def empty(cls, dim: int) -> "JointDensity":
        """The joint of the empty label set: one sample, no coordinates"""
        return cls((), np.zeros((1, 0, dim)), np.ones(1))

    @property
    def size(self) -> int:
        return self.samples.shape[0]

    def position(self, label: Label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DensityError(f"{label} is not part of this joint") from None

    def marginal(self, label: Label) -> SingleObjectDensity:
        """
        Marginal of one label: the joint weights assigned to that label's
        coordinate. Grid joints sum masses per grid point.
        """
        i = self.position(label)
        if self.grid is not None:
            masses = np.bincount(self.indices[:, i], weights=self.weights, minlength=self.grid.shape[0])
            return DiscreteGridDensity(self.grid, masses, normalize=True)
        return ParticleCloud(self.samples[:, i, :], self.weights, normalize=True)

    def marginals(self) -> Dict[Label, SingleObjectDensity]:
        return {label: self.marginal(label) for label in self.labels}

    def __repr__(self) -> str:
        return f"JointDensity(labels={self.labels}, n={self.size})"


class LabeledJointDensity:
    """
    pi(X) = w(L(X)) p(X): joint existence probabilities over label sets and
    the label-conditioned joint density for every set with w(L) > 0.
    """

    def __init__(
        self,
        existence_weights: Mapping[LabelSet, float],
        joints: Mapping[LabelSet, JointDensity],
        require_normalized: bool = True,
    ):
        weights = {}
        for label_set, w in existence_weights.items():
            if not np.isfinite(w) or w < 0:
                raise DensityError(f"w({label_set}) must be finite and >= 0, got {w}")
            weights[LabelSet(label_set)] = float(w)

        for label_set, w in weights.items():
            if w <= 0:
                continue
            joint = joints.get(label_set)
            if joint is None:
                raise DensityError(f"missing joint density for {label_set}")
            if joint.labels != label_set.labels:
                raise DensityError(f"joint labels {joint.labels} do not match {label_set}")

        if require_normalized:
            total = math.fsum(weights.values())
            if abs(total - 1.0) > WEIGHT_TOLERANCE:
                raise DensityError(f"existence weights sum to {total!r}, expected 1")

        self.existence_weights = dict(sorted(weights.items()))
        self.joints = {ls: joints[ls] for ls in self.existence_weights if self.existence_weights[ls] > 0}

    def support(self) -> List[LabelSet]:
        return list(self.joints.keys())

    def __repr__(self) -> str:
        return f"LabeledJointDensity(label_sets={len(self.joints)})"


def decompose(pi: DiscreteInstance) -> LabeledJointDensity:
    """
    Split an enumerated labeled density into w(L) and p(X | L).

    Raises:
        DensityError: if pi does not integrate to 1 within 1e-6
    """
    total = pi.total_mass()
    if abs(total - 1.0) > DECOMPOSE_TOLERANCE:
        raise DensityError(f"labeled density integrates to {total!r}, expected 1")

    grouped: Dict[Tuple[Label, ...], List] = defaultdict(list)
    for key, mass in pi.masses.items():
        grouped[key_labels(key)].append((key_indices(key), mass))

    existence = {}
    joints = {}
    dim = pi.grid.shape[1]
    for labels, entries in grouped.items():
        label_set = LabelSet(labels)
        w = math.fsum(mass for _, mass in entries)
        existence[label_set] = w
        if not labels:
            joints[label_set] = JointDensity.empty(dim)
            continue
        indices = np.array([idx for idx, _ in entries], dtype=int)
        masses = np.array([mass for _, mass in entries]) / w
        joints[label_set] = JointDensity(
            labels, pi.grid[indices], masses / masses.sum(), grid=pi.grid, indices=indices
        )
    return LabeledJointDensity(existence, joints)


def marginal_product_approx(pi: LabeledJointDensity) -> DGlmbDensity:
    """
    delta-GLMB with w_hat(I) = w(I) and p_hat(., l) the marginals of the
    label-conditioned joint.
    """
    components = [
        DGlmbComponent(label_set, pi.existence_weights[label_set], joint.marginals())
        for label_set, joint in pi.joints.items()
    ]
    return DGlmbDensity(components)

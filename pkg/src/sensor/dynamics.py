"""
Nearly-constant-velocity kinematics with a random-walk amplitude.

State [p_x, v_x, p_y, v_y, zeta]:
    x' = F x + v,  v ~ N(0, Q)
    F = diag(F1, F1, 1),  Q = diag(q Q1, q Q1, a_zeta T_s)
The amplitude modulus is clamped at 0 after every step.
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import block_diag
from scipy.stats import multivariate_normal

from src.core.labels import AMPLITUDE_INDEX, KINEMATIC_DIM, Label, LabeledState
from src.glmb.densities import ParticleCloud, SingleObjectDensity

logger = logging.getLogger(__name__)


class DynamicsParams(BaseModel):
    """Sampling time T_s (s), process-noise PSD q (m^2/s^3), amplitude fluctuation a_zeta (1/s)"""

    model_config = ConfigDict(frozen=True)

    T_s: float = Field(..., gt=0)
    q: float = Field(..., ge=0)
    a_zeta: float = Field(..., ge=0)


def _f1(T: float) -> np.ndarray:
    return np.array([[1.0, T], [0.0, 1.0]])


def _q1(T: float) -> np.ndarray:
    return np.array([[T**3 / 3.0, T**2 / 2.0], [T**2 / 2.0, T]])


def transition_matrix(T_s: float) -> np.ndarray:
    return block_diag(_f1(T_s), _f1(T_s), np.eye(1))


def process_noise(params: DynamicsParams) -> np.ndarray:
    q1 = params.q * _q1(params.T_s)
    return block_diag(q1, q1, np.array([[params.a_zeta * params.T_s]]))


def _noise_factor(params: DynamicsParams) -> np.ndarray:
    # Q1 is positive definite for T_s > 0, so the factor exists even when q = 0.
    l1 = np.sqrt(params.q) * np.linalg.cholesky(_q1(params.T_s))
    return block_diag(l1, l1, np.array([[np.sqrt(params.a_zeta * params.T_s)]]))


def propagate_points(points: np.ndarray, params: DynamicsParams, rng: np.random.Generator) -> np.ndarray:
    """Propagate (N, 5) states one step; amplitude clamped at 0"""
    points = np.asarray(points, dtype=float)
    noise = rng.standard_normal(points.shape) @ _noise_factor(params).T
    out = points @ transition_matrix(params.T_s).T + noise
    out[:, AMPLITUDE_INDEX] = np.maximum(out[:, AMPLITUDE_INDEX], 0.0)
    return out


def propagate(state: LabeledState, params: DynamicsParams, rng: np.random.Generator) -> LabeledState:
    kinematic = propagate_points(state.kinematic[None, :], params, rng)[0]
    return LabeledState(kinematic, state.label)


def drift(points: np.ndarray, T_s: float, steps: int = 1) -> np.ndarray:
    """Noise-free propagation by `steps` sampling periods"""
    F = np.linalg.matrix_power(transition_matrix(T_s), steps)
    return np.asarray(points, dtype=float) @ F.T


def transition_log_density(x_next: np.ndarray, x_prev: np.ndarray, params: DynamicsParams) -> np.ndarray:
    """
    log N(x_next; F x_prev, Q) of the unclamped kernel.

    Degenerate Q (q = 0 or a_zeta = 0) is handled as a singular Gaussian.
    """
    x_next = np.atleast_2d(np.asarray(x_next, dtype=float))
    x_prev = np.atleast_2d(np.asarray(x_prev, dtype=float))
    mean = x_prev @ transition_matrix(params.T_s).T
    cov = process_noise(params)
    diff = x_next - mean
    return np.atleast_1d(
        multivariate_normal(mean=np.zeros(KINEMATIC_DIM), cov=cov, allow_singular=True).logpdf(diff)
    )


class NcvTransition:
    """Particle propagation kernel for the filter's survival model"""

    def __init__(self, params: DynamicsParams):
        self.params = params

    def propagate(
        self, density: SingleObjectDensity, label: Label, rng: np.random.Generator
    ) -> ParticleCloud:
        return ParticleCloud(propagate_points(density.points, self.params, rng), density.weights)

    def log_density(self, x_next: np.ndarray, x_prev: np.ndarray) -> np.ndarray:
        return transition_log_density(x_next, x_prev, self.params)

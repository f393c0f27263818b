"""
delta-GLMB measurement update.

generic_update handles any multi-object likelihood: each component's
per-label clouds are paired by particle index into joint samples, the
joint is reweighted by the likelihood, the component weight is scaled by
the estimated evidence eta_z(I), and the reweighted joint is replaced by
the product of its marginals. When every density of a component is a grid
density the joint is the full product grid instead (exact).
"""

import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from src.core.labels import KINEMATIC_DIM, Label
from src.glmb.densities import DegeneratePosteriorError, DiscreteGridDensity, SingleObjectDensity
from src.glmb.dglmb import DGlmbComponent, DGlmbDensity, from_log_weights, truncate
from src.approx.joint import JointDensity
from src.approx.separable import MultiObjectLogLikelihood, SeparableLikelihood, separable_update
from src.filter.models import DegenerateUpdateError, FilterParams, FilterState
from src.filter.predict import resample_clouds
from src.filter.smc import RngStage, RngStreams, systematic_resample

logger = logging.getLogger(__name__)


def _state_dim(density: DGlmbDensity) -> int:
    for component in density.components:
        for p in component.densities.values():
            return p.dim
    return KINEMATIC_DIM


def _is_grid_component(component: DGlmbComponent) -> bool:
    densities = list(component.densities.values())
    if not densities or not all(isinstance(p, DiscreteGridDensity) for p in densities):
        return False
    return all(densities[0].same_grid(p) for p in densities[1:])


def grid_joint(component: DGlmbComponent) -> Tuple[JointDensity, np.ndarray]:
    """
    Full product joint of a grid component.

    Returns:
        (joint with prior masses, log prior mass per joint point)
    """
    labels = component.label_set.labels
    tables = [component.densities[label].masses for label in labels]
    masses = tables[0]
    for table in tables[1:]:
        masses = np.multiply.outer(masses, table)
    grid = component.densities[labels[0]].grid
    joint = JointDensity.on_grid(labels, grid, masses)
    with np.errstate(divide="ignore"):
        log_prior = np.log(masses.reshape(-1))
    return joint, log_prior


def _update_grid_component(component, log_likelihood):
    joint, log_prior = grid_joint(component)
    log_joint = log_prior + np.asarray(log_likelihood(joint.labels, joint.samples), dtype=float)
    with np.errstate(divide="ignore"):
        log_eta = float(logsumexp(log_joint))
    if not np.isfinite(log_eta):
        return None, -np.inf
    posterior = JointDensity(
        joint.labels, joint.samples, np.exp(log_joint - log_eta), grid=joint.grid, indices=joint.indices
    )
    return posterior.marginals(), log_eta


def _update_particle_component(component, log_likelihood, n_particles, streams, time, c_idx):
    labels = component.label_set.labels
    clouds = []
    for label in labels:
        p = component.densities[label]
        if p.size != n_particles or not p.is_uniform():
            rng = streams.generator(time, RngStage.PAIRING, c_idx, label)
            p = systematic_resample(p, n_particles, rng)
        clouds.append(p.points)

    # Common-index pairing: joint sample j takes particle j of every label.
    samples = np.stack(clouds, axis=1)
    log_g = np.asarray(log_likelihood(labels, samples), dtype=float)
    with np.errstate(divide="ignore"):
        log_sum = float(logsumexp(log_g))
    if not np.isfinite(log_sum):
        return None, -np.inf
    log_eta = log_sum - math.log(n_particles)
    joint = JointDensity(labels, samples, np.exp(log_g - log_sum))
    return joint.marginals(), log_eta


def generic_update(
    state: FilterState,
    log_likelihood: MultiObjectLogLikelihood,
    params: Optional[FilterParams] = None,
    streams: Optional[RngStreams] = None,
    exhaustive: bool = False,
) -> FilterState:
    """
    Update with an arbitrary multi-object log-likelihood
    (labels, points[N, n, d]) -> [N].

    Args:
        exhaustive: skip truncation (weights are only normalized)

    Raises:
        DegenerateUpdateError: if every component's evidence is zero
    """
    params = params or FilterParams()
    streams = streams or RngStreams(0)
    dim = _state_dim(state.density)

    entries = []
    for c_idx, component in enumerate(state.density.components):
        if component.weight <= 0:
            continue
        if not component.label_set:
            log_eta = float(np.asarray(log_likelihood((), np.zeros((1, 0, dim))), dtype=float).reshape(-1)[0])
            densities: Optional[Dict[Label, SingleObjectDensity]] = {}
        elif _is_grid_component(component):
            densities, log_eta = _update_grid_component(component, log_likelihood)
        else:
            densities, log_eta = _update_particle_component(
                component, log_likelihood, params.n_particles, streams, state.time, c_idx
            )
        if densities is None or not np.isfinite(log_eta):
            continue
        entries.append((component.label_set, math.log(component.weight) + log_eta, densities))

    try:
        posterior = from_log_weights(entries)
    except DegeneratePosteriorError as e:
        raise DegenerateUpdateError(f"update at t={state.time}: {e}") from e

    return _finish(state, posterior, params, streams, exhaustive)


def separable_update_path(
    state: FilterState,
    likelihood: SeparableLikelihood,
    params: Optional[FilterParams] = None,
    streams: Optional[RngStreams] = None,
    exhaustive: bool = False,
) -> FilterState:
    """Update with a separable likelihood via the exact conjugate update"""
    params = params or FilterParams()
    streams = streams or RngStreams(0)
    try:
        posterior = separable_update(state.density, likelihood)
    except DegeneratePosteriorError as e:
        raise DegenerateUpdateError(f"separable update at t={state.time}: {e}") from e
    return _finish(state, posterior, params, streams, exhaustive)


def _finish(state, posterior, params, streams, exhaustive) -> FilterState:
    if not exhaustive:
        posterior = truncate(posterior, params.caps.max_components, params.caps.min_weight)
    posterior = resample_clouds(posterior, params.n_particles, streams, state.time, RngStage.UPDATE_RESAMPLE)
    logger.debug(
        f"Updated t={state.time}: {len(posterior)} components",
        extra={"time": state.time, "n_components": len(posterior)},
    )
    return FilterState(posterior, state.time, state.label_space_used)

"""
delta-GLMB prediction with LMB birth.

Each prior component J spawns one predicted hypothesis per survivor subset
L of J and birth subset B, weighted w_J * eta_S^L * (1 - eta_S)^(J - L) *
w_B(B). Survivors and births are independent Bernoulli items, so the k
heaviest (L, B) pairs of a component are enumerated best-first.
Hypotheses from different prior components that land on the same label set
are merged (weights summed, densities weight-averaged).
"""

import logging
import math
from collections import OrderedDict
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.core.labels import Label, LabelError, LabelSet
from src.glmb.densities import ParticleCloud, SingleObjectDensity, mix
from src.glmb.dglmb import DGlmbComponent, DGlmbDensity, truncate
from src.filter.enumeration import k_best_subsets
from src.filter.models import BirthModel, FilterParams, FilterState, SurvivalModel
from src.filter.smc import RngStage, RngStreams, systematic_resample

logger = logging.getLogger(__name__)


def _log(p: float) -> float:
    return math.log(p) if p > 0 else -math.inf


def _log1m(p: float) -> float:
    return math.log1p(-p) if p < 1 else -math.inf


def _merge_densities(parts: List[Tuple[float, SingleObjectDensity]]) -> SingleObjectDensity:
    """Weight-average densities, collapsing repeats of the same object"""
    unique: "OrderedDict[int, List]" = OrderedDict()
    for weight, density in parts:
        if id(density) in unique:
            unique[id(density)][0] += weight
        else:
            unique[id(density)] = [weight, density]
    if len(unique) == 1:
        return next(iter(unique.values()))[1]
    return mix([d for _, d in unique.values()], [w for w, _ in unique.values()])


def resample_clouds(
    density: DGlmbDensity,
    n_particles: int,
    streams: RngStreams,
    time: int,
    stage: RngStage,
) -> DGlmbDensity:
    """Systematically resample every particle cloud that is weighted or not of size n_particles"""
    components = []
    for c_idx, component in enumerate(density.components):
        densities = {}
        for label, p in component.densities.items():
            if isinstance(p, ParticleCloud) and (p.size != n_particles or not p.is_uniform()):
                rng = streams.generator(time, stage, c_idx, label)
                p = systematic_resample(p, n_particles, rng)
            densities[label] = p
        components.append(DGlmbComponent(component.label_set, component.weight, densities))
    return DGlmbDensity(components)


def predict(
    state: FilterState,
    survival: SurvivalModel,
    birth: BirthModel,
    params: Optional[FilterParams] = None,
    streams: Optional[RngStreams] = None,
    exhaustive: bool = False,
) -> FilterState:
    """
    Chapman-Kolmogorov step from time k to k+1.

    Args:
        exhaustive: enumerate every (L, B) pair and skip truncation

    Returns:
        predicted state at time k+1, normalized (and truncated unless exhaustive)
    """
    params = params or FilterParams()
    streams = streams or RngStreams(0)
    next_time = state.time + 1

    if birth.births:
        if birth.birth_time != next_time:
            raise LabelError(f"birth labels must carry time {next_time}, got {birth.birth_time}")
        reused = set(birth.labels) & state.label_space_used
        if reused:
            raise LabelError(f"birth labels already allocated: {sorted(reused)}")

    birth_labels = list(birth.labels)
    birth_in = [_log(birth.existence(l)) for l in birth_labels]
    birth_out = [_log1m(birth.existence(l)) for l in birth_labels]
    k = None if exhaustive else params.caps.max_components

    groups: Dict[LabelSet, List[Tuple[float, Dict[Label, SingleObjectDensity]]]] = {}
    for c_idx, component in enumerate(state.density.components):
        if component.weight <= 0:
            continue
        survivors: Dict[Label, SingleObjectDensity] = {}
        labels, log_in, log_out = [], [], []
        for label, density in component.densities.items():
            rng = streams.generator(next_time, RngStage.PROPAGATE, c_idx, label)
            predicted, eta_s = survival.predict_density(density, label, rng)
            if predicted is not None:
                survivors[label] = predicted
            labels.append(label)
            log_in.append(_log(eta_s))
            log_out.append(_log1m(eta_s))

        hypotheses = k_best_subsets(labels + birth_labels, log_in + birth_in, log_out + birth_out, k)
        log_w = math.log(component.weight)
        for log_h, label_set in hypotheses:
            densities = {
                label: survivors[label] if label in survivors else birth.density(label)
                for label in label_set
            }
            groups.setdefault(label_set, []).append((math.exp(log_w + log_h), densities))

    components = []
    for label_set in sorted(groups):
        members = groups[label_set]
        weight = math.fsum(w for w, _ in members)
        if weight <= 0:
            continue
        densities = {
            label: _merge_densities([(w, d[label]) for w, d in members]) for label in label_set
        }
        components.append(DGlmbComponent(label_set, weight, densities))

    predicted = DGlmbDensity(components, require_normalized=False)
    if exhaustive:
        predicted = DGlmbDensity(
            [c.with_weight(c.weight / predicted.total_weight) for c in predicted.components]
        )
    else:
        predicted = truncate(predicted, params.caps.max_components, params.caps.min_weight)
    predicted = resample_clouds(
        predicted, params.n_particles, streams, next_time, RngStage.PREDICT_RESAMPLE
    )

    logger.debug(
        f"Predicted to t={next_time}: {len(state.density)} -> {len(predicted)} components",
        extra={"time": next_time, "n_components": len(predicted)},
    )
    return FilterState(predicted, next_time, state.label_space_used | set(birth.labels))

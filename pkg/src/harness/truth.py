"""
Scripted ground truth and the models derived from a scenario.
"""

import logging
from typing import List, Optional

import numpy as np

from src.core.labels import Label, LabeledState
from src.filter.models import BirthModel, SurvivalModel
from src.filter.smc import RngStage, RngStreams
from src.glmb.densities import ParticleCloud
from src.harness.schema import ScenarioConfig
from src.sensor.dynamics import NcvTransition, drift
from src.sensor.radar import RadarGrid

logger = logging.getLogger(__name__)

TruthSequence = List[List[LabeledState]]


def _trajectory(cfg: ScenarioConfig, initial, birth: int, death: int) -> np.ndarray:
    """(death - birth, 4) noise-free positions/velocities"""
    steps = max(death - birth, 0)
    out = np.empty((steps, 4))
    state = np.asarray(initial, dtype=float)
    for i in range(steps):
        out[i] = state
        state = drift(np.append(state, 0.0)[None, :], cfg.dynamics.T_s)[0, :4]
    return out


def truth_labels(cfg: ScenarioConfig) -> List[Label]:
    """Label(birth step, index among targets scripted for that step), in script order"""
    counters = {}
    labels = []
    for target in cfg.truth:
        index = counters.get(target.birth, 0)
        counters[target.birth] = index + 1
        labels.append(Label(target.birth, index))
    return labels


def truth_points(cfg: ScenarioConfig) -> np.ndarray:
    """Every scripted (p_x, v_x, p_y, v_y, A_bar) within the horizon, (M, 5)"""
    rows = []
    for target in cfg.truth:
        death = min(target.death, cfg.n_steps + 1)
        for x in _trajectory(cfg, target.initial, target.birth, death):
            rows.append(np.append(x, cfg.amplitude))
    return np.array(rows).reshape(-1, 5)


def build_grid(cfg: ScenarioConfig) -> RadarGrid:
    """Cells covering the truth and the birth means"""
    births = np.array([np.append(b.mean, cfg.amplitude) for b in cfg.births])
    points = np.vstack([truth_points(cfg), births])
    return RadarGrid.covering(
        points,
        cfg.grid.R,
        cfg.grid.B_rad,
        cfg.grid.D,
        noise_power=cfg.grid.noise_power,
        margin=cfg.grid.margin,
        min_margin_cells=cfg.grid.min_margin_cells,
    )


def generate_truth(cfg: ScenarioConfig, grid: Optional[RadarGrid] = None) -> TruthSequence:
    """
    Truth sets for steps 0..n_steps. A target leaving the grid coverage is
    dropped from that step on.
    """
    truth: TruthSequence = [[] for _ in range(cfg.n_steps + 1)]
    for target, label in zip(cfg.truth, truth_labels(cfg)):
        death = min(target.death, cfg.n_steps + 1)
        for offset, x in enumerate(_trajectory(cfg, target.initial, target.birth, death)):
            kinematic = np.append(x, cfg.amplitude)
            if grid is not None and not grid.in_coverage(kinematic[None, :])[0]:
                logger.warning(
                    f"Truth target {target.name} leaves grid coverage at step {target.birth + offset}",
                    extra={"time": target.birth + offset},
                )
                break
            truth[target.birth + offset].append(LabeledState(kinematic, label))
    return truth


def build_birth_model(
    cfg: ScenarioConfig, time: int, streams: RngStreams, n_particles: Optional[int] = None
) -> BirthModel:
    """
    LMB birth for step `time`: one track per birth point, Gaussian in
    kinematics, amplitude N(A_bar, amplitude_std^2) clamped at 0.
    """
    n = n_particles or cfg.filter.n_particles
    births = {}
    for i, point in enumerate(cfg.births):
        rng = streams.generator(time, RngStage.BIRTH, i)
        kinematics = rng.normal(point.mean, np.sqrt(point.Q_B), size=(n, 4))
        amplitude = np.maximum(rng.normal(cfg.amplitude, point.amplitude_std, size=n), 0.0)
        births[Label(time, i)] = (point.r_B, ParticleCloud(np.column_stack([kinematics, amplitude])))
    return BirthModel(births)


def build_survival_model(cfg: ScenarioConfig) -> SurvivalModel:
    return SurvivalModel(cfg.p_S, NcvTransition(cfg.dynamics_params()))

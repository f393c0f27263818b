"""
Trial and Monte Carlo execution.

Every trial draws from its own RngStreams(seed, trial), so results do not
depend on the number of worker threads or on completion order.
"""

import logging
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import pandas as pd

from src.core.labels import LabeledState
from src.filter.models import FilterState, TrackEstimate
from src.filter.predict import predict
from src.filter.smc import RngStage, RngStreams
from src.filter.tracks import extract_tracks
from src.filter.update import generic_update, separable_update_path
from src.glmb.densities import DegeneratePosteriorError
from src.glmb.dglmb import cardinality
from src.harness.outputs import plot_outputs, write_outputs, write_power_maps
from src.harness.schema import ScenarioConfig
from src.harness.truth import build_birth_model, build_grid, build_survival_model, generate_truth
from src.metrics.aggregate import AggregationError, TrialSeries, mc_aggregate
from src.metrics.ospa import OspaParams, ospa
from src.sensor.frame_io import dump_frame_binary, dump_frame_csv
from src.sensor.radar import RadarFrame, RadarGrid, RadarLikelihood, noiseless_frame, synthesize_frame

logger = logging.getLogger(__name__)


class OutputDirectoryError(Exception):
    """Raised when the results directory cannot be written"""
    pass


@dataclass
class StepRecord:
    time: int
    truth: List[LabeledState]
    estimates: List[TrackEstimate]
    mean_power: float
    peak_power: float
    n_cells: int
    n_components: int
    expected_cardinality: float


@dataclass
class TrialResult:
    trial: int
    steps: List[StepRecord] = field(default_factory=list)
    failed: bool = False
    error: Optional[str] = None

    def series(self, params: OspaParams) -> TrialSeries:
        return TrialSeries(
            time=[s.time for s in self.steps],
            ospa=[
                ospa(
                    [e.position for e in s.estimates],
                    [t.position for t in s.truth],
                    params,
                )
                for s in self.steps
            ],
            est_card=[len(s.estimates) for s in self.steps],
            true_card=[len(s.truth) for s in self.steps],
        )


@dataclass
class MonteCarloResult:
    aggregate: pd.DataFrame
    trials: List[TrialResult]

    @property
    def n_failed(self) -> int:
        return sum(1 for t in self.trials if t.failed)

    @property
    def failed_fraction(self) -> float:
        return self.n_failed / len(self.trials)


def run_trial(
    cfg: ScenarioConfig,
    trial: int,
    grid: Optional[RadarGrid] = None,
    frame_dir: Optional[Path] = None,
) -> TrialResult:
    """
    One pass over steps 1..n_steps: synthesize the frame, predict, update
    (cfg.mode), extract tracks. A degenerate update marks the trial failed.
    """
    grid = grid or build_grid(cfg)
    streams = RngStreams(cfg.monte_carlo.seed, trial)
    truth = generate_truth(cfg, grid)
    survival = build_survival_model(cfg)
    params = cfg.filter_params()

    result = TrialResult(trial=trial)
    state = FilterState.initial(0)
    logger.info(f"Trial {trial} started", extra={"trial": trial})
    try:
        for k in range(1, cfg.n_steps + 1):
            frame = synthesize_frame(truth[k], grid, streams.generator(k, RngStage.FRAME))
            if frame_dir is not None:
                dump_frame_binary(frame, frame_dir / f"trial{trial:04d}_t{k:04d}.bin")
                dump_frame_csv(frame, frame_dir / f"trial{trial:04d}_t{k:04d}.csv")

            birth = build_birth_model(cfg, k, streams)
            state = predict(state, survival, birth, params, streams)
            likelihood = RadarLikelihood(frame, grid, cfg.grid.psf_threshold)
            if cfg.mode == "separable":
                state = separable_update_path(state, likelihood.separable(), params, streams)
            else:
                state = generic_update(state, likelihood, params, streams)

            estimates = extract_tracks(state)
            result.steps.append(
                StepRecord(
                    time=k,
                    truth=truth[k],
                    estimates=estimates,
                    mean_power=frame.mean_power(),
                    peak_power=frame.peak_power(),
                    n_cells=grid.n_cells,
                    n_components=len(state.density),
                    expected_cardinality=cardinality(state.density).mean(),
                )
            )
            logger.debug(
                f"t={k}: {len(estimates)} tracks, {len(state.density)} components",
                extra={"trial": trial, "time": k, "n_components": len(state.density)},
            )
    except DegeneratePosteriorError as e:
        result.failed = True
        result.error = str(e)
        logger.warning(f"Trial {trial} failed: {e}", extra={"trial": trial})
        return result

    logger.info(f"Trial {trial} finished", extra={"trial": trial})
    return result


def power_map_frames(
    cfg: ScenarioConfig, time: int, grid: Optional[RadarGrid] = None
) -> Tuple[RadarFrame, RadarFrame]:
    """The frame trial 0 sees at step `time`, and the same scene without noise"""
    grid = grid or build_grid(cfg)
    truth = generate_truth(cfg, grid)[time]
    noisy = synthesize_frame(truth, grid, RngStreams(cfg.monte_carlo.seed, 0).generator(time, RngStage.FRAME))
    return noisy, noiseless_frame(truth, grid)


def check_output_dir(out_dir: Union[str, Path]) -> Path:
    """Create the directory and prove it is writable"""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out):
            pass
    except OSError as e:
        raise OutputDirectoryError(f"Output directory is not writable: {out} ({e})") from e
    return out


def run_monte_carlo(
    cfg: ScenarioConfig,
    out_dir: Union[str, Path],
    trials: Optional[int] = None,
    threads: int = 1,
    dump_frames: bool = False,
) -> MonteCarloResult:
    """
    Run trials concurrently, aggregate the successful ones and write the
    CSV tables and figures to out_dir.

    Raises:
        OutputDirectoryError: before any computation when out_dir is unusable
        AggregationError: when every trial failed
    """
    out = check_output_dir(out_dir)
    frame_dir = None
    if dump_frames:
        frame_dir = check_output_dir(out / "frames")

    n_trials = trials or cfg.monte_carlo.trials
    grid = build_grid(cfg)
    logger.info(
        f"Running {n_trials} trial(s) on a {grid.shape} grid with {threads} thread(s)",
        extra={"trials": n_trials},
    )

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda t: run_trial(cfg, t, grid, frame_dir), range(n_trials)))

    completed = [r for r in results if not r.failed]
    if not completed:
        raise AggregationError(f"all {n_trials} trials failed")
    aggregate = mc_aggregate([r.series(cfg.ospa_params()) for r in completed])

    mc = MonteCarloResult(aggregate=aggregate, trials=results)
    write_outputs(mc, out)
    time = min(cfg.monte_carlo.power_map_time, cfg.n_steps)
    write_power_maps(*power_map_frames(cfg, time, grid), grid, time, out)
    plot_outputs(out)
    if mc.n_failed:
        logger.warning(f"{mc.n_failed}/{n_trials} trials failed")
    return mc

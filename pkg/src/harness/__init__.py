"""
Experiment harness: scenario files, truth generation, Monte Carlo runs,
result tables, figures and the command line.
"""

from src.harness.cli import build_parser, main
from src.harness.loader import ScenarioLoadError, load_config, parse_config
from src.harness.outputs import plot_outputs, plot_power_maps, write_outputs, write_power_maps
from src.harness.runner import (
    MonteCarloResult,
    OutputDirectoryError,
    StepRecord,
    TrialResult,
    check_output_dir,
    power_map_frames,
    run_monte_carlo,
    run_trial,
)
from src.harness.schema import (
    BirthPointSpec,
    DynamicsSpec,
    FilterSpec,
    GridSpec,
    MonteCarloSpec,
    OspaSpec,
    ScenarioConfig,
    TruthTargetSpec,
)
from src.harness.truth import (
    build_birth_model,
    build_grid,
    build_survival_model,
    generate_truth,
    truth_labels,
    truth_points,
)

__all__ = [
    "build_parser",
    "main",
    "ScenarioLoadError",
    "load_config",
    "parse_config",
    "plot_outputs",
    "write_outputs",
    "plot_power_maps",
    "write_power_maps",
    "power_map_frames",
    "MonteCarloResult",
    "OutputDirectoryError",
    "StepRecord",
    "TrialResult",
    "check_output_dir",
    "run_monte_carlo",
    "run_trial",
    "BirthPointSpec",
    "DynamicsSpec",
    "FilterSpec",
    "GridSpec",
    "MonteCarloSpec",
    "OspaSpec",
    "ScenarioConfig",
    "TruthTargetSpec",
    "build_birth_model",
    "build_grid",
    "build_survival_model",
    "generate_truth",
    "truth_labels",
    "truth_points",
]

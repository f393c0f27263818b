"""
Command-line surface: run, selftest, plot.

Exit codes: 0 success, 1 configuration / scenario / output-directory error
or failed selftest, 2 when more than 10% of trials degenerated.
"""

import argparse
import logging
from pathlib import Path
from typing import List, Optional

from src.config import Config, ConfigValidationError, load_config as load_runtime_config
from src.harness.loader import ScenarioLoadError, load_config
from src.harness.outputs import plot_outputs
from src.harness.runner import OutputDirectoryError, run_monte_carlo
from src.harness.schema import ScenarioConfig
from src.metrics.aggregate import AggregationError
from src.observability.log_sanitizer import safe_log_value
from src.observability.logger import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_DEGENERATE = 2
MAX_FAILED_FRACTION = 0.10


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glmb-tbd",
        description="Labeled multi-Bernoulli track-before-detect experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a Monte Carlo scenario")
    run.add_argument("--config", required=True, help="Scenario JSON path or bundled preset name")
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="Results directory (default: GLMB_OUTPUT_DIR)")
    run.add_argument("--mode", choices=["separable", "generic"], default=None)
    run.add_argument("--dump-frames", action="store_true")
    run.add_argument("--threads", type=int, default=None)

    selftest = sub.add_parser("selftest", help="Check the density algebra against exact oracles")
    selftest.add_argument("--seed", type=int, default=0)
    selftest.add_argument("--instances", type=int, default=20)
    selftest.add_argument("--perturbations", type=int, default=200)

    plot = sub.add_parser("plot", help="Regenerate SVG figures from result CSVs")
    plot.add_argument("--in", dest="in_dir", required=True)
    return parser


def resolve_scenario(ref: str, runtime: Config) -> Path:
    """A path that exists wins over a preset of the same name"""
    path = Path(ref)
    if path.exists():
        return path
    return runtime.preset_path(ref)


def apply_overrides(cfg: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    updates = {}
    if args.mode is not None:
        updates["mode"] = args.mode
    mc_updates = {}
    if args.trials is not None:
        mc_updates["trials"] = args.trials
    if args.seed is not None:
        mc_updates["seed"] = args.seed
    if mc_updates:
        updates["monte_carlo"] = cfg.monte_carlo.model_copy(update=mc_updates)
    return cfg.model_copy(update=updates) if updates else cfg


def _run(args: argparse.Namespace, runtime: Config) -> int:
    if args.trials is not None and args.trials < 1:
        logger.error(f"--trials must be >= 1, got {args.trials}")
        return EXIT_INVALID
    threads = args.threads if args.threads is not None else runtime.threads
    if threads < 1:
        logger.error(f"--threads must be >= 1, got {threads}")
        return EXIT_INVALID

    cfg = apply_overrides(load_config(resolve_scenario(args.config, runtime)), args)
    out_dir = Path(args.out or runtime.output_dir)
    try:
        mc = run_monte_carlo(cfg, out_dir, threads=threads, dump_frames=args.dump_frames)
    except AggregationError as e:
        logger.error(f"No usable trials: {e}")
        return EXIT_DEGENERATE

    if mc.failed_fraction > MAX_FAILED_FRACTION:
        logger.error(
            f"{mc.n_failed}/{len(mc.trials)} trials degenerated "
            f"(limit {MAX_FAILED_FRACTION:.0%})"
        )
        return EXIT_DEGENERATE
    logger.info(f"✓ Scenario {safe_log_value(cfg.name)} written to {out_dir}")
    return EXIT_OK


def _selftest(args: argparse.Namespace) -> int:
    from src.oracle.selftest import run_selftest

    report = run_selftest(seed=args.seed, instances=args.instances, perturbations=args.perturbations)
    for check in report.checks:
        status = "✓" if check.passed else "✗"
        level = logging.INFO if check.passed else logging.ERROR
        logger.log(level, f"{status} {check.name}: {check.detail}")
    return EXIT_OK if report.passed else EXIT_INVALID


def _plot(args: argparse.Namespace) -> int:
    in_dir = Path(args.in_dir)
    if not (in_dir / "cardinality.csv").exists() or not (in_dir / "ospa.csv").exists():
        logger.error(f"No result tables in {in_dir}")
        return EXIT_INVALID
    plot_outputs(in_dir)
    return EXIT_OK


def main(argv: Optional[List[str]] = None, env_file: Optional[str] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        runtime = load_runtime_config(env_file=env_file)
    except ConfigValidationError as e:
        setup_logging()
        logger.error(str(e))
        return EXIT_INVALID
    setup_logging(runtime.log_level, runtime.log_file)

    try:
        if args.command == "run":
            return _run(args, runtime)
        if args.command == "selftest":
            return _selftest(args)
        return _plot(args)
    except ScenarioLoadError as e:
        logger.error(str(e), extra={"fields": e.fields})
        return EXIT_INVALID
    except OutputDirectoryError as e:
        logger.error(str(e))
        return EXIT_INVALID

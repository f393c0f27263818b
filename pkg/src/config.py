"""
Runtime configuration loader with fail-fast validation.

Reads the process environment (optionally seeded from a .env file) for the
settings that are not part of a scenario: where presets live, where results
go, how many trial workers to use, and how to log.

If any validation fails -> the CLI refuses to start with a clear error.
"""

import os
import logging
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)


class ConfigValidationError(Exception):
    """Raised when runtime config validation fails (fail-fast)"""
    pass


VALID_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class Config:
    """
    Central runtime configuration with fail-fast validation.

    Validates:
    1. Scenario directory exists and holds at least one preset
    2. Output directory is usable (created lazily by the harness)
    3. Worker thread count is a positive integer
    4. Log level / log file

    On failure: raises ConfigValidationError listing every problem found.
    """

    def __init__(self, env_file: Optional[str] = None):
        """
        Initialize config with fail-fast validation.

        Args:
            env_file: Path to .env file (default: .env in project root)

        Raises:
            ConfigValidationError: If any required validation fails
        """
        self.errors: List[str] = []

        if env_file:
            load_dotenv(env_file)
        else:
            env_path = Path(__file__).parent.parent / ".env"
            if env_path.exists():
                load_dotenv(env_path)
                logger.info(f"Loaded .env from {env_path}")

        self._validate_scenario_dir()
        self._validate_output_dir()
        self._validate_threads()
        self._validate_logging()

        if self.errors:
            error_report = "\n".join(f"  ✗ {err}" for err in self.errors)
            msg = f"Configuration validation failed:\n{error_report}"
            logger.error(msg)
            raise ConfigValidationError(msg)

        logger.info("✓ Configuration validation passed")

    def _validate_scenario_dir(self):
        """Scenario presets directory must exist and contain *.json files"""
        self.scenario_dir = os.getenv("GLMB_SCENARIO_DIR", "./knowledge/scenarios")
        scenario_path = Path(self.scenario_dir)

        if not scenario_path.exists():
            self.errors.append(f"GLMB_SCENARIO_DIR does not exist: {self.scenario_dir}")
            return

        presets = sorted(scenario_path.glob("*.json"))
        if not presets:
            self.errors.append(f"No scenario presets (*.json) found in {self.scenario_dir}")
            return

        logger.info(f"  GLMB_SCENARIO_DIR: {self.scenario_dir} ({len(presets)} preset(s))")

    def _validate_output_dir(self):
        """Output directory may not exist yet, but must not be a file"""
        self.output_dir = os.getenv("GLMB_OUTPUT_DIR", "./results")
        output_path = Path(self.output_dir)

        if output_path.exists() and not output_path.is_dir():
            self.errors.append(f"GLMB_OUTPUT_DIR is not a directory: {self.output_dir}")
            return

        logger.info(f"  GLMB_OUTPUT_DIR: {self.output_dir}")

    def _validate_threads(self):
        """Trial worker count"""
        raw = os.getenv("GLMB_THREADS", "1")
        try:
            self.threads = int(raw)
        except ValueError:
            self.errors.append(f"GLMB_THREADS must be an integer, got {raw!r}")
            self.threads = 1
            return

        if self.threads < 1:
            self.errors.append(f"GLMB_THREADS must be >= 1, got {self.threads}")

    def _validate_logging(self):
        """Log level and optional log file"""
        self.log_level = os.getenv("GLMB_LOG_LEVEL", "INFO").upper()
        if self.log_level not in VALID_LOG_LEVELS:
            self.errors.append(
                f"GLMB_LOG_LEVEL must be one of {', '.join(VALID_LOG_LEVELS)}, "
                f"got {self.log_level!r}"
            )

        self.log_file = os.getenv("GLMB_LOG_FILE") or None
        if self.log_file and not Path(self.log_file).parent.exists():
            self.errors.append(f"GLMB_LOG_FILE directory does not exist: {self.log_file}")

    def preset_path(self, name: str) -> Path:
        """Resolve a bundled preset by name (with or without .json)"""
        filename = name if name.endswith(".json") else f"{name}.json"
        return Path(self.scenario_dir) / filename

    def __repr__(self) -> str:
        return (
            f"Config(\n"
            f"  scenario_dir={self.scenario_dir},\n"
            f"  output_dir={self.output_dir},\n"
            f"  threads={self.threads},\n"
            f"  log_level={self.log_level},\n"
            f"  log_file={self.log_file}\n"
            f")"
        )


def load_config(env_file: Optional[str] = None) -> Config:
    """
    Load and validate runtime config with fail-fast behavior.

    Returns:
        Config: Validated configuration object

    Raises:
        ConfigValidationError: If any validation fails
    """
    return Config(env_file=env_file)

"""
Scenario file loader.

Errors from JSON parsing or schema validation are re-raised as
ScenarioLoadError listing the dotted path of every offending field.
"""

import json
import logging
from pathlib import Path
from typing import List, Union

from pydantic import ValidationError

from src.harness.schema import ScenarioConfig
from src.observability.log_sanitizer import safe_log_value

logger = logging.getLogger(__name__)


class ScenarioLoadError(Exception):
    """Raised when a scenario file cannot be read or validated"""

    def __init__(self, message: str, fields: List[str] = None):
        super().__init__(message)
        self.fields = fields or []


def _field_path(loc) -> str:
    return ".".join(str(part) for part in loc)


def parse_config(data: dict, source: str = "<memory>") -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        fields = [_field_path(err["loc"]) or "<root>" for err in e.errors()]
        details = "\n".join(
            f"  ✗ {_field_path(err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        )
        raise ScenarioLoadError(f"Scenario validation failed for {source}:\n{details}", fields) from e


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    """
    Load and validate a scenario file.

    Raises:
        ScenarioLoadError: missing file, malformed JSON or schema violation
    """
    path = Path(path)
    if not path.exists():
        raise ScenarioLoadError(f"Scenario file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ScenarioLoadError(f"JSON parse error in {path.name}: {e}") from e

    config = parse_config(data, source=path.name)
    logger.info(
        f"✓ Scenario loaded: {safe_log_value(config.name)} "
        f"({config.n_steps} steps, {len(config.truth)} targets, mode={config.mode})"
    )
    return config

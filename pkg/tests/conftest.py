"""
Shared fixtures: seeded generators, small grids, bundled scenario presets.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

SCENARIO_DIR = ROOT / "knowledge" / "scenarios"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line_grid():
    """Four 1-D grid points"""
    return np.array([[-1.5], [0.0], [0.5], [2.0]])


@pytest.fixture
def scenario_dir():
    return SCENARIO_DIR


@pytest.fixture
def preset_data(scenario_dir):
    import json

    def _load(name: str) -> dict:
        with open(scenario_dir / f"{name}.json", "r", encoding="utf-8") as f:
            return json.load(f)

    return _load


@pytest.fixture
def clean_env(monkeypatch):
    """Unset every GLMB_* variable so Config sees only what a test sets"""
    for key in ("GLMB_SCENARIO_DIR", "GLMB_OUTPUT_DIR", "GLMB_THREADS", "GLMB_LOG_LEVEL", "GLMB_LOG_FILE"):
        monkeypatch.delenv(key, raising=False)
    return monkeypatch

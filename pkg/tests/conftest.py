from dataclasses import replace
from pathlib import Path

import pytest

from foodborne import ModelParams, parse_scenario

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = REPO_ROOT / "scenarios"


@pytest.fixture(scope="session")
def baseline_params() -> ModelParams:
    return ModelParams.baseline()


@pytest.fixture(scope="session")
def baseline_scenario():
    return parse_scenario(SCENARIO_DIR / "baseline.scenario")


@pytest.fixture(scope="session")
def feasible_scenario():
    return parse_scenario(SCENARIO_DIR / "feasible.scenario")


@pytest.fixture()
def short_scenario(feasible_scenario):
    """Feasible-region scenario trimmed to a quick horizon for module tests."""
    return replace(feasible_scenario, t_end=20.0)

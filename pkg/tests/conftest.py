from pathlib import Path

import pytest

from justnow.model import AdverbialParams, EventParams, FactorizedModel

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO_ROOT


@pytest.fixture()
def tiny_truth() -> FactorizedModel:
    """Small 2x2 model for fast fitting tests."""
    return FactorizedModel.from_params(
        [EventParams("meal", 300.0), EventParams("move", 200000.0)],
        [AdverbialParams("just", 0.48, 0.05), AdverbialParams("ages", 0.95, 0.2)],
    )

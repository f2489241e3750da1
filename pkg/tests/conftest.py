import os

import numpy as np
import pytest
from fastapi.testclient import TestClient

from backend.main import app
from backend.config import ScenarioConfig


@pytest.fixture(scope="session")
def client():
    os.environ["MAX_API_TRIALS"] = "200000"
    return TestClient(app)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    # escenario chico: N=2000 deja 100 excesos con ρ=0.95
    return ScenarioConfig(samples=2000, trials=2000, scenarios=3, seed=11)

"""
Fixture condivise
=================

Micro-istanza a due celle, scenari giocattolo e fabbrica di istanze casuali.
"""

import numpy as np
import pytest

from hetnet_energy.controllers.experiment_controller import random_instance
from hetnet_energy.models.patterns import PatternSet, enumerate_all
from hetnet_energy.models.rates import RateTensor, build_rate_tensor
from hetnet_energy.models.scenario import build_scenario


def micro_array() -> np.ndarray:
    """K=2, B=2, I=3: pattern (1,0), (0,1), (1,1)."""
    r = np.zeros((2, 2, 3))
    r[0, 0, 0], r[1, 0, 0] = 10.0, 6.0
    r[0, 1, 1], r[1, 1, 1] = 8.0, 12.0
    r[0, 0, 2], r[0, 1, 2] = 5.0, 3.0
    r[1, 0, 2], r[1, 1, 2] = 2.0, 7.0
    return r


@pytest.fixture
def micro_rates() -> np.ndarray:
    return micro_array()


@pytest.fixture
def micro_tensor() -> RateTensor:
    return RateTensor.from_array(micro_array())


@pytest.fixture
def micro_patterns() -> PatternSet:
    return PatternSet(np.array([[1, 0], [0, 1], [1, 1]], dtype=np.uint8), ("micro",) * 3)


@pytest.fixture
def micro_demands() -> np.ndarray:
    return np.array([4.0, 4.0])


@pytest.fixture
def toy_config() -> dict:
    """Una macro e due pico con quattro punti di test espliciti."""
    return {
        "network": {
            "base_stations": [
                {"kind": "macro", "x": 0.0, "y": 0.0},
                {"kind": "pico", "x": 150.0, "y": 0.0},
                {"kind": "pico", "x": -120.0, "y": 80.0},
            ],
            "test_points": [
                {"x": 30.0, "y": 20.0},
                {"x": 140.0, "y": 10.0},
                {"x": 160.0, "y": -15.0},
                {"x": -110.0, "y": 70.0},
            ],
        },
        "demand": {"rate_bps": 1e6},
        "seed": 3,
    }


@pytest.fixture
def toy_scenario(toy_config):
    return build_scenario(toy_config)


@pytest.fixture
def toy_patterns(toy_scenario):
    return enumerate_all(toy_scenario.B)


@pytest.fixture
def toy_rates(toy_scenario, toy_patterns):
    return build_rate_tensor(toy_scenario, toy_patterns)


@pytest.fixture
def instance_factory():
    """Istanze casuali ammissibili (scenario, pattern, rate, domande)."""
    return random_instance

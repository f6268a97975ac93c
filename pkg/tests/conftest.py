import numpy as np
import pytest

from ghzsim.circuit import NoiseParams
from ghzsim.schemas import CALIBRATED_COHERENCE, CALIBRATED_SIGNAL_WEIGHT


@pytest.fixture(scope="session")
def calibrated_noise() -> NoiseParams:
    """Noise parameters fitted to fidelity 0.729 and error rate 0.191."""
    return NoiseParams(
        signal_weight=CALIBRATED_SIGNAL_WEIGHT, coherence=CALIBRATED_COHERENCE
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240915)

import numpy as np
import pytest

from swarmcov.spectral import SpectralConfig


@pytest.fixture
def cfg5():
    return SpectralConfig(num_coeffs=5)


@pytest.fixture
def cfg10():
    return SpectralConfig(num_coeffs=10)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)

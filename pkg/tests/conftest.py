import pytest

from gst_lab.gst import GstModel
from gst_lab.levy import IsotropicStable, LevyModel
from gst_lab.spectral import discretize_H, ground_state
from gst_lab.spectral.grid import Grid1D, Polynomial


def pytest_configure(config):
    # pytest.ini keeps the [tool:pytest] header, so register the markers here as well
    for line in (
        "slow: marks tests as slow (deselect with '-m \"not slow\"')",
        "integration: marks tests as integration tests",
        "unit: marks tests as unit tests",
    ):
        config.addinivalue_line("markers", line)


@pytest.fixture(scope="session")
def brownian_model():
    return LevyModel(sigma=1.0)


@pytest.fixture(scope="session")
def stable_model():
    return LevyModel(sigma=0.0, density=IsotropicStable(1.5))


@pytest.fixture(scope="session")
def harmonic_operator(brownian_model):
    """H = -(1/2) d^2/dx^2 + x^2 / 2, ground state (pi^-1/4 e^{-x^2/2}, 1/2)."""
    return discretize_H(brownian_model, Polynomial(degree_half=1, scale=0.5), Grid1D(12.0, 2048))


@pytest.fixture(scope="session")
def harmonic_state(harmonic_operator):
    return ground_state(harmonic_operator)


@pytest.fixture(scope="session")
def harmonic_gst(brownian_model, harmonic_state, harmonic_operator):
    return GstModel(brownian_model, harmonic_state, harmonic_operator, eps_s=0.05)


@pytest.fixture(scope="session")
def stable_operator(stable_model):
    return discretize_H(stable_model, Polynomial(degree_half=2, scale=1.0), Grid1D(8.0, 1024))


@pytest.fixture(scope="session")
def stable_state(stable_operator):
    return ground_state(stable_operator)


@pytest.fixture(scope="session")
def stable_gst(stable_model, stable_state, stable_operator):
    return GstModel(stable_model, stable_state, stable_operator, eps_s=0.05)

#tests/conftest.py
"""
Shared pytest fixtures for the softmax mixture test suite.
"""

import numpy as np
import pytest

from src.bench.scenario import Scenario
from src.estimation.em import EmConfig, population_counts
from src.estimation.hermite import AxisFrame
from src.estimation.model import FeatureMatrix, MixtureParams
from src.estimation.mom import complete_basis


@pytest.fixture
def rng():
    """A fixed numpy generator for test data."""
    return np.random.default_rng(20240101)


@pytest.fixture
def features(rng):
    """Forty Gaussian support points in three dimensions."""
    return FeatureMatrix(rng.standard_normal((40, 3)))


@pytest.fixture
def two_component():
    """A well-separated two-component mixture in three dimensions."""
    return MixtureParams(
        alpha=np.array([0.3, 0.7]),
        thetas=np.array([[0.8, -0.2, 0.1], [-0.5, 0.4, 0.3]]),
    )


@pytest.fixture
def population(features, two_component):
    """Population-limit counts of ``two_component`` over ``features``."""
    return population_counts(features, two_component)


@pytest.fixture
def standard_frame() -> AxisFrame:
    """The frame of the first coordinate axis in three dimensions."""
    return complete_basis(np.array([1.0, 0.0, 0.0]))


def make_frame_mixture(rng, K: int, L: int, spacing: float = 0.4):
    """
    Random axis v plus a K-atom mixture whose axis coordinates are spaced by
    ``spacing`` and whose weights are all at least 0.1.
    """
    v = rng.standard_normal(L)
    v /= np.linalg.norm(v)
    frame = complete_basis(v)
    axis = spacing * (np.arange(K) - (K - 1) / 2.0)
    rest = rng.uniform(-0.3, 0.3, size=(K, L - 1)) / np.sqrt(L)
    thetas = np.outer(axis, frame.v) + rest @ frame.W.T
    alpha = 0.1 + (1.0 - 0.1 * K) * rng.dirichlet(np.ones(K))
    alpha /= alpha.sum()
    return frame, MixtureParams(alpha=alpha, thetas=thetas)


@pytest.fixture
def frame_mixture():
    """Factory for (frame, mixture) pairs with separated axis coordinates."""
    return make_frame_mixture


@pytest.fixture
def small_scenario() -> Scenario:
    """A quick two-component scenario covering every method family."""
    return Scenario(
        K=2,
        L=4,
        p=300,
        N=5000,
        seed=3,
        methods=("MoM", "EM-MoM", "EM-dr-rand-2", "EM-oracle"),
        n_axis_candidates=3,
        em_config=EmConfig(max_iters=50),
    )

#tests/unit/test_estimation/test_subspace.py
"""
Unit tests for subspace estimation, axis selection and random starts.
"""

import numpy as np
import pytest

from src.core.exceptions import (
    AxisSelectionException,
    InvalidInputException,
    NumericDegeneracyException,
    ProjectionFailureException,
)
from src.estimation.em import population_counts
from src.estimation.model import FeatureMatrix, MixtureParams, SampleCounts
from src.estimation.subspace import (
    estimate_gamma,
    projected_direction,
    random_inits,
    select_axis,
    subspace_angles,
    top_eigenspace,
)


def _uniform(p: int) -> SampleCounts:
    return SampleCounts(freq=np.full(p, 1.0 / p), n_samples=0, population=True)


class TestGamma:
    """Test the second-moment matrix estimate."""

    def test_identity_covariance(self, features):
        """Uniform counts give X'X/p - I."""
        gamma = estimate_gamma(_uniform(features.p), features)
        expected = features.rows.T @ features.rows / features.p - np.eye(3)
        assert np.allclose(gamma, expected)

    def test_scaled_covariance(self, features):
        """Sigma = 4 I whitens the features and subtracts Sigma^{-1}."""
        gamma = estimate_gamma(_uniform(features.p), features, Sigma=4.0 * np.eye(3))
        second_moment = features.rows.T @ features.rows / features.p
        expected = second_moment / 16.0 - np.eye(3) / 4.0
        assert np.allclose(gamma, expected)

    def test_symmetric(self, features, population):
        """The estimate is exactly symmetric."""
        gamma = estimate_gamma(population, features)
        assert np.array_equal(gamma, gamma.T)

    def test_covariance_shape_checked(self, features, population):
        """Sigma must match the feature dimension."""
        with pytest.raises(InvalidInputException):
            estimate_gamma(population, features, Sigma=np.eye(2))


class TestTopEigenspace:
    """Test the leading eigenspace."""

    def test_diagonal(self):
        """The top two eigenvectors of diag(3, 2, 1) are e_1 and e_2."""
        estimate = top_eigenspace(np.diag([3.0, 2.0, 1.0]), 2)
        assert np.allclose(estimate.V_hat, [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        assert np.allclose(estimate.eigvals, [3.0, 2.0])
        assert estimate.K == 2

    def test_sign_convention(self):
        """The largest entry of every eigenvector is positive."""
        gamma = np.array([[2.0, -1.0], [-1.0, 2.0]])
        V = top_eigenspace(gamma, 2).V_hat
        for column in V.T:
            assert column[np.argmax(np.abs(column))] > 0

    @pytest.mark.parametrize("K", [0, 4])
    def test_rank_range(self, K):
        """K must lie between 1 and L."""
        with pytest.raises(InvalidInputException):
            top_eigenspace(np.eye(3), K)


class TestDirections:
    """Test random directions inside the subspace."""

    def test_unit_and_in_span(self):
        """Directions have unit norm and live in span(V_hat)."""
        V = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        v = projected_direction(V, 3)
        assert np.linalg.norm(v) == pytest.approx(1.0)
        assert v[2] == 0.0

    def test_deterministic(self):
        """The same seed gives the same direction."""
        V = np.eye(4)[:, :2]
        assert np.array_equal(projected_direction(V, 9), projected_direction(V, 9))

    def test_zero_subspace(self):
        """A zero basis never yields a direction."""
        with pytest.raises(NumericDegeneracyException):
            projected_direction(np.zeros((3, 1)), 0)

    def test_subspace_angles(self):
        """Equal spans have zero principal angles."""
        V = np.eye(3)[:, :2]
        rotated = V @ np.array([[0.6, -0.8], [0.8, 0.6]])
        assert np.allclose(subspace_angles(V, rotated), 0.0, atol=1e-10)
        assert subspace_angles([1.0, 0.0], [0.0, 1.0])[0] == pytest.approx(np.pi / 2)


class TestSelectAxis:
    """Test axis selection by Hankel determinant."""

    def test_prefers_separating_axis(self):
        """The axis along which the atoms differ wins."""
        rng = np.random.default_rng(5)
        X = FeatureMatrix(rng.standard_normal((5000, 2)))
        omega = MixtureParams(
            alpha=np.array([0.5, 0.5]), thetas=np.array([[1.0, 0.0], [-1.0, 0.0]])
        )
        counts = population_counts(X, omega)
        e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        chosen = select_axis(
            counts,
            X,
            np.eye(2),
            K=2,
            B=1.5,
            n_candidates=2,
            rng_seed=0,
            candidates=[e2, e1],
        )
        assert np.array_equal(chosen, e1)

    def test_random_candidates(self, features, population):
        """Random candidates are unit vectors drawn in the subspace."""
        V = np.eye(3)[:, :2]
        chosen = select_axis(
            population, features, V, K=1, B=1.0, n_candidates=5, rng_seed=1
        )
        assert np.linalg.norm(chosen) == pytest.approx(1.0)
        assert chosen[2] == 0.0

    def test_all_candidates_fail(self, features, population, monkeypatch):
        """Selection fails when no candidate can be projected."""

        def _fail(m, B, quiet=False):
            raise ProjectionFailureException(
                "infeasible", infeasibility=1.0, iterations=1
            )

        monkeypatch.setattr("src.estimation.subspace.project_to_valid_moments", _fail)
        with pytest.raises(AxisSelectionException) as exc_info:
            select_axis(
                population, features, np.eye(3), K=1, B=1.0, n_candidates=3, rng_seed=2
            )
        assert exc_info.value.n_candidates == 3

    def test_candidate_count_checked(self, features, population):
        """At least one random candidate is needed."""
        with pytest.raises(InvalidInputException):
            select_axis(
                population, features, np.eye(3), K=1, B=1.0, n_candidates=0, rng_seed=2
            )


class TestRandomInits:
    """Test random EM starting points."""

    def test_dr_mode_unit_atoms_in_span(self):
        """dr atoms are unit vectors inside span(V_hat)."""
        V = np.eye(4)[:, :2]
        inits = random_inits(V, K=3, m=5, mode="dr", rng_seed=4)
        assert len(inits) == 5
        for omega in inits:
            assert np.allclose(np.linalg.norm(omega.thetas, axis=1), 1.0)
            assert np.allclose(omega.thetas[:, 2:], 0.0)
            assert np.allclose(omega.alpha, 1.0 / 3.0)

    def test_rand_mode_scale(self):
        """rand atoms have squared norm sqrt(L) on average."""
        inits = random_inits(np.eye(100)[:, :1], K=1, m=1000, mode="rand", rng_seed=8)
        sq_norms = [float(omega.thetas[0] @ omega.thetas[0]) for omega in inits]
        assert np.mean(sq_norms) == pytest.approx(10.0, rel=0.1)

    def test_unknown_mode(self):
        """Only the dr and rand modes exist."""
        with pytest.raises(InvalidInputException):
            random_inits(np.eye(2), K=1, m=1, mode="grid", rng_seed=0)

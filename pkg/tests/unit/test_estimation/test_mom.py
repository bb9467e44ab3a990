#tests/unit/test_estimation/test_mom.py
"""
Unit tests for the method-of-moments pipeline: moment projection, Hankel
root recovery, coordinate and weight recovery, and the full fit.
"""

import math

import numpy as np
import pytest

from src.bench.metrics import err_alpha, match_components
from src.core.exceptions import (
    ComplexRootException,
    DegenerateMomentsException,
    InvalidInputException,
    MomFailureException,
    ProjectionFailureException,
)
from src.estimation.em import population_counts
from src.estimation.hermite import LatentMoments, population_latent_moments
from src.estimation.model import FeatureMatrix
from src.estimation.mom import (
    CurveOracle,
    HankelPair,
    ProjectionOutcome,
    _accept_projection,
    complete_basis,
    hankel_root_recovery,
    localizing_min_eigenvalue,
    mom_fit,
    project_to_valid_moments,
    recover_coordinates,
    recover_weights,
    simplex_project,
    solve_moment_projection,
)


class TestHankelPair:
    """Test Hankel matrix construction."""

    def test_layout(self):
        """H holds m_{i+j} and S holds m_{i+j+1}."""
        pair = HankelPair.from_moments([1.0, 2.0, 3.0, 4.0])
        assert np.array_equal(pair.H, [[1.0, 2.0], [2.0, 3.0]])
        assert np.array_equal(pair.S, [[2.0, 3.0], [3.0, 4.0]])
        assert pair.K == 2

    def test_odd_length(self):
        """Moment vectors have even length."""
        with pytest.raises(InvalidInputException):
            HankelPair.from_moments([1.0, 2.0, 3.0])

    def test_localizing_matrices(self):
        """The localizing pair is B H + S and B H - S."""
        upper, lower = HankelPair.from_moments([1.0, 0.5, 0.25, 0.125]).localizing(2.0)
        assert np.allclose(upper, [[2.5, 1.25], [1.25, 0.625]])
        assert np.allclose(lower, [[1.5, 0.75], [0.75, 0.375]])


def _atomic_moments(nodes, weights, n):
    """Moments (1, m_1, ..., m_{n-1}) of sum_k weights_k delta_{nodes_k}."""
    return np.asarray(weights) @ np.vander(np.asarray(nodes), n, increasing=True)


def _random_measure(rng, K):
    """K separated atoms in [-0.65, 0.65] with weights of at least 0.1."""
    nodes = np.linspace(-0.6, 0.6, K) + rng.uniform(-0.05, 0.05, size=K)
    weights = 0.1 + (1.0 - 0.1 * K) * rng.dirichlet(np.ones(K))
    return _atomic_moments(nodes, weights, 2 * K)


class TestMomentProjection:
    """Test the projection onto valid moment sequences."""

    def test_single_atom_unchanged(self):
        """Moments of a point mass inside [-B, B] are already valid."""
        m = np.array([1.0, 0.5, 0.25, 0.125])
        outcome = solve_moment_projection(m, 1.0)
        assert outcome.converged
        assert outcome.iterations == 0
        assert np.allclose(outcome.moments, m, atol=1e-9)

    def test_negative_variance_projects_to_origin(self):
        """(1, 0, -0.5, 0) has the point mass at zero as its projection."""
        projected = project_to_valid_moments(np.array([1.0, 0.0, -0.5, 0.0]), 1.0)
        assert np.allclose(projected, [1.0, 0.0, 0.0, 0.0], atol=1e-9)
        assert localizing_min_eigenvalue(projected, 1.0) >= -1e-8

    def test_idempotent(self):
        """Projecting a projection changes nothing."""
        once = project_to_valid_moments(np.array([1.0, 0.9, 0.2, 0.7]), 1.0)
        twice = project_to_valid_moments(once, 1.0)
        assert np.linalg.norm(twice - once) <= 1e-9
        assert localizing_min_eigenvalue(once, 1.0) >= -1e-8

    def test_leading_moment_checked(self):
        """The zeroth moment must equal one."""
        with pytest.raises(InvalidInputException):
            solve_moment_projection(np.array([0.5, 0.0]), 1.0)

    def test_feasible_when_stopped_early(self):
        """An iterate cut off by the cap is still a valid moment vector."""
        outcome = solve_moment_projection(
            np.array([1.0, 0.9, 0.2, 0.7]), 1.0, max_iters=1
        )
        assert outcome.iterations == 1
        assert outcome.moments[0] == 1.0
        assert outcome.min_eigenvalue >= -1e-8

    def test_random_vectors_feasible_and_idempotent(self, rng):
        """Perturbed moment vectors project to valid, stable points."""
        for _ in range(100):
            K = int(rng.integers(1, 5))
            m = _random_measure(rng, K)
            m[1:] += rng.normal(scale=0.05, size=2 * K - 1)
            once = project_to_valid_moments(m, 1.0)
            assert localizing_min_eigenvalue(once, 1.0) >= -1e-8
            twice = project_to_valid_moments(once, 1.0)
            assert np.linalg.norm(twice - once) <= 1e-9

    @pytest.mark.parametrize("noise", [1e-6, 0.05])
    def test_closest_point(self, rng, noise):
        """The projection is no farther from the input than the generator."""
        for _ in range(10):
            K = int(rng.integers(2, 5))
            m_true = _random_measure(rng, K)
            m = m_true.copy()
            m[1:] += rng.normal(scale=noise, size=2 * K - 1)
            projected = project_to_valid_moments(m, 1.0)
            distance = np.linalg.norm(projected - m)
            assert distance <= np.linalg.norm(m_true - m) + 1e-9

    def test_noisy_high_degree_moments(self, rng):
        """Degree-19 moments with sampling-size noise still project feasibly."""
        K = 10
        m = _random_measure(rng, K)
        noise_scale = np.sqrt([math.factorial(r) for r in range(2 * K)]) / 100.0
        m[1:] += rng.normal(size=2 * K - 1) * noise_scale[1:]
        projected = project_to_valid_moments(m, 1.0)
        assert projected[0] == 1.0
        assert localizing_min_eigenvalue(projected, 1.0) >= -1e-8
        assert np.all(np.abs(projected) <= 1.0 + 1e-12)

    def test_accepts_feasible_point_at_cap(self, caplog):
        """An unconverged but feasible projection is accepted."""
        outcome = ProjectionOutcome(
            moments=np.array([1.0, 0.0]),
            iterations=10,
            min_eigenvalue=-1e-10,
            converged=False,
        )
        assert np.array_equal(_accept_projection(outcome), [1.0, 0.0])
        assert "short of its tolerance" in caplog.text

    def test_rejects_infeasible_point_at_cap(self):
        """An unconverged infeasible projection raises."""
        outcome = ProjectionOutcome(
            moments=np.array([1.0, 0.0]),
            iterations=10,
            min_eigenvalue=-0.2,
            converged=False,
        )
        with pytest.raises(ProjectionFailureException) as exc_info:
            _accept_projection(outcome)
        assert exc_info.value.infeasibility == pytest.approx(0.2)
        assert exc_info.value.iterations == 10


class TestCurveOracle:
    """Test the polynomial minimization over [-B, B]."""

    @pytest.mark.parametrize(
        "c, expected",
        [([1.0, 0.0, 0.0], -1.0), ([0.0, 1.0, 0.0], 0.0), ([0.0, 0.0, -1.0], 1.0)],
    )
    def test_known_minimizers(self, c, expected):
        """Linear, quadratic and cubic objectives on [-1, 1]."""
        assert CurveOracle(4, 1.0)(np.array(c)) == pytest.approx(expected, abs=1e-12)

    def test_polished_off_grid(self):
        """An interior minimizer between grid points is found to full precision."""
        t = CurveOracle(4, 1.0)(np.array([-0.31415, 0.5, 0.0]))
        assert t == pytest.approx(0.31415, abs=1e-12)

    def test_scaled_interval(self):
        """The search interval follows B."""
        assert CurveOracle(2, 2.5)(np.array([-1.0])) == pytest.approx(2.5)


class TestRootRecovery:
    """Test Hankel root recovery."""

    def test_single_atom(self):
        """K = 1 returns the mean."""
        assert np.allclose(hankel_root_recovery([1.0, 0.3], 1), [0.3])

    def test_symmetric_pair(self):
        """(1, 0, a^2, 0) has roots -a and a."""
        assert np.allclose(hankel_root_recovery([1.0, 0.0, 0.25, 0.0], 2), [-0.5, 0.5])

    def test_singular_hankel(self):
        """A point mass cannot support two atoms."""
        with pytest.raises(DegenerateMomentsException):
            hankel_root_recovery([1.0, 0.0, 0.0, 0.0], 2)

    def test_complex_roots(self):
        """A negative variance gives complex roots."""
        with pytest.raises(ComplexRootException) as exc_info:
            hankel_root_recovery([1.0, 0.0, -1.0, 0.0], 2)
        assert len(exc_info.value.roots) == 2

    def test_roots_clipped_to_box(self):
        """Roots are kept within B up to a small slack."""
        roots = hankel_root_recovery([1.0, 2.0], 1, B=1.0)
        assert roots[0] <= 1.0 + 1e-8


class TestCoordinateAndWeightRecovery:
    """Test the Vandermonde solves."""

    def test_coordinates_single_atom(self):
        """K = 1 copies the mixed moments and clips them to B."""
        moments = LatentMoments(
            m=np.array([1.0, 0.2]), mixed=np.array([[0.3], [1.5]]), K=1, B=1.0
        )
        coords = recover_coordinates(moments, [0.2], 1.0)
        assert np.allclose(coords, [[0.3], [1.0]])

    def test_weights(self):
        """Weights at known roots reproduce the first moments."""
        roots = np.array([-0.4, 0.6])
        alpha = np.array([0.3, 0.7])
        m = np.array([1.0, alpha @ roots])
        assert np.allclose(recover_weights(m, roots), alpha)

    def test_simplex_projection_examples(self):
        """Known projections onto the simplex."""
        assert np.allclose(simplex_project([0.6, 0.6]), [0.5, 0.5])
        assert np.allclose(simplex_project([2.0, 0.0]), [1.0, 0.0])

    def test_simplex_projection_optimality(self, rng):
        """Positive entries share one shift and the zeroed ones fall below it."""
        y = rng.normal(size=7)
        out = simplex_project(y)
        assert out.sum() == pytest.approx(1.0)
        assert np.all(out >= 0)
        support = out > 0
        shifts = y[support] - out[support]
        assert np.allclose(shifts, shifts[0])
        assert np.all(y[~support] <= shifts[0] + 1e-12)


class TestCompleteBasis:
    """Test the Householder completion of an axis."""

    def test_first_axis(self):
        """e_1 completes with the remaining unit vectors."""
        frame = complete_basis([1.0, 0.0, 0.0])
        assert np.array_equal(frame.rotation, np.eye(3))

    def test_random_axis(self, rng):
        """A random unit axis completes to an orthonormal frame."""
        v = rng.normal(size=5)
        v /= np.linalg.norm(v)
        frame = complete_basis(v)
        R = frame.rotation
        assert np.allclose(R.T @ R, np.eye(5), atol=1e-12)
        assert np.allclose(R[:, 0], v)

    def test_negative_first_axis(self):
        """-e_1 is handled by the reflection."""
        frame = complete_basis([-1.0, 0.0])
        assert np.allclose(frame.v, [-1.0, 0.0])
        assert np.allclose(frame.W[:, 0] @ frame.v, 0.0)

    @pytest.mark.parametrize("v", [[0.0, 0.0], [2.0, 0.0]])
    def test_rejects_non_unit(self, v):
        """Zero and non-unit axes are rejected."""
        with pytest.raises(InvalidInputException):
            complete_basis(v)


class TestMomFit:
    """Test the full moment pipeline."""

    @pytest.mark.parametrize("K", [1, 2, 3])
    def test_exact_recovery_from_population_moments(self, rng, frame_mixture, K):
        """Exact latent moments recover the mixture."""
        L = 4
        frame, omega = frame_mixture(rng, K, L)
        X = FeatureMatrix(rng.standard_normal((12, L)))
        counts = population_counts(X, omega)
        moments = population_latent_moments(omega, frame, K)
        result = mom_fit(counts, X, K, 1.0, frame.v, moments=moments)
        assert np.allclose(result.omega_hat.thetas, omega.thetas, atol=1e-6)
        assert np.allclose(result.omega_hat.alpha, omega.alpha, atol=1e-6)
        assert result.diagnostics.projection_iters == 0
        assert result.frame is not None

    def test_exact_recovery_grid(self, rng, frame_mixture):
        """Twenty exact-moment instances over K in {2, 3, 4} and L in {3, 10}."""
        for index in range(20):
            K = (2, 3, 4)[index % 3]
            L = (3, 10)[index % 2]
            frame, omega = frame_mixture(rng, K, L, spacing=0.3 + 0.1 * rng.random())
            X = FeatureMatrix(rng.standard_normal((2 * L + 5, L)))
            counts = population_counts(X, omega)
            moments = population_latent_moments(omega, frame, K)
            result = mom_fit(counts, X, K, 1.0, frame.v, moments=moments)
            theta_error, perm = match_components(omega.thetas, result.omega_hat.thetas)
            assert theta_error <= 1e-6
            assert err_alpha(omega.alpha, result.omega_hat.alpha, perm) <= 1e-6

    def test_negated_axis(self, rng, frame_mixture):
        """Negating the axis negates the roots and keeps the atoms."""
        frame, omega = frame_mixture(rng, 3, 4)
        X = FeatureMatrix(rng.standard_normal((12, 4)))
        counts = population_counts(X, omega)
        flipped = complete_basis(-frame.v)
        forward = mom_fit(
            counts,
            X,
            3,
            1.0,
            frame.v,
            moments=population_latent_moments(omega, frame, 3),
        )
        backward = mom_fit(
            counts,
            X,
            3,
            1.0,
            flipped.v,
            moments=population_latent_moments(omega, flipped, 3),
        )
        assert np.allclose(backward.roots, -forward.roots[::-1], atol=1e-8)
        assert np.allclose(
            backward.omega_hat.thetas[::-1], forward.omega_hat.thetas, atol=1e-8
        )
        assert np.allclose(
            backward.omega_hat.alpha[::-1], forward.omega_hat.alpha, atol=1e-8
        )

    def test_estimated_moments_path(self, features, population):
        """Without injected moments the estimator runs on the counts."""
        result = mom_fit(population, features, 1, 1.0, [1.0, 0.0, 0.0])
        assert result.omega_hat.K == 1
        assert result.projected_moments.K == 1

    def test_axis_dimension_checked(self, features, population):
        """The axis must live in the feature dimension."""
        with pytest.raises(InvalidInputException):
            mom_fit(population, features, 1, 1.0, [1.0, 0.0])

    def test_injected_moments_shape_checked(self, features, population):
        """Injected moments must match K."""
        moments = LatentMoments(
            m=np.array([1.0, 0.1]), mixed=np.zeros((2, 1)), K=1, B=1.0
        )
        with pytest.raises(InvalidInputException):
            mom_fit(population, features, 2, 1.0, [1.0, 0.0, 0.0], moments=moments)

    def test_complex_roots_give_partial_result(self, features, population, monkeypatch):
        """A root failure carries an estimate built from the real parts."""
        outcome = ProjectionOutcome(
            moments=np.array([1.0, 0.0, -1.0, 0.0]),
            iterations=1,
            min_eigenvalue=0.0,
            converged=True,
        )
        monkeypatch.setattr(
            "src.estimation.mom.solve_moment_projection", lambda m, B: outcome
        )
        with pytest.raises(MomFailureException) as exc_info:
            mom_fit(population, features, 2, 1.0, [1.0, 0.0, 0.0])
        assert exc_info.value.stage == "roots"
        assert exc_info.value.partial_result is not None
        assert exc_info.value.partial_result.K == 2

    def test_projection_failure_stage(self, features, population, monkeypatch):
        """An infeasible projection fails at the projection stage."""
        outcome = ProjectionOutcome(
            moments=np.array([1.0, 0.0, -1.0, 0.0]),
            iterations=5,
            min_eigenvalue=-1.0,
            converged=False,
        )
        monkeypatch.setattr(
            "src.estimation.mom.solve_moment_projection", lambda m, B: outcome
        )
        with pytest.raises(MomFailureException) as exc_info:
            mom_fit(population, features, 2, 1.0, [1.0, 0.0, 0.0])
        assert exc_info.value.stage == "projection"
        assert exc_info.value.partial_result is None

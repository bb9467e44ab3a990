#tests/unit/test_bench/test_methods.py
"""
Unit tests for the method dispatcher and its failure statuses.
"""

import time

import numpy as np
import pytest

from src.bench.methods import (
    STATUS_DEGENERATE,
    STATUS_MOM_FAILURE,
    STATUS_OK,
    FitOptions,
    MethodOutcome,
    fit_method,
    resolve_sigma,
    run_mom,
)
from src.bench.scenario import Scenario, generate_scenario
from src.core.exceptions import (
    InvalidInputException,
    MomFailureException,
    NumericDegeneracyException,
)
from src.core.utils.file_utils import write_table
from src.estimation.em import EmConfig
from src.estimation.model import MixtureParams


@pytest.fixture
def data(small_scenario):
    return generate_scenario(small_scenario)


@pytest.fixture
def options():
    return FitOptions(
        K=2, em_config=EmConfig(max_iters=30), n_axis_candidates=3, m_inits=2
    )


class TestResolveSigma:
    """Test covariance resolution."""

    def test_identity(self, features):
        """identity means no rescaling."""
        assert resolve_sigma("identity", features) is None
        assert resolve_sigma(None, features) is None

    def test_sample(self, features):
        """sample uses X'X / p."""
        Sigma = resolve_sigma("sample", features)
        assert np.allclose(Sigma, features.rows.T @ features.rows / features.p)

    def test_csv_path(self, features, tmp_path):
        """Any other string is read as a CSV matrix."""
        path = tmp_path / "sigma.csv"
        write_table(path, ["s1", "s2", "s3"], (2.0 * np.eye(3)).tolist())
        assert np.allclose(resolve_sigma(str(path), features), 2.0 * np.eye(3))

    def test_shape_checked(self, features):
        """The matrix must be L x L."""
        with pytest.raises(InvalidInputException):
            resolve_sigma(np.eye(2), features)


class TestFitMethod:
    """Test each method family through the dispatcher."""

    def test_oracle_from_truth(self, data, options):
        """EM-oracle starts at the truth and reports its trace."""
        outcome = fit_method(
            "EM-oracle",
            data.counts,
            data.X,
            options,
            seed=1,
            omega_star=data.omega_star,
        )
        assert outcome.status == STATUS_OK
        assert outcome.method == "EM-oracle"
        assert outcome.iters >= 1
        assert outcome.loglik == outcome.loglik_trace[-1]

    def test_oracle_needs_truth(self, data, options):
        """EM-oracle without the truth is a usage error."""
        with pytest.raises(InvalidInputException):
            fit_method("EM-oracle", data.counts, data.X, options, seed=1)

    def test_plain_em_needs_init(self, data, options):
        """Plain EM requires a starting point."""
        with pytest.raises(InvalidInputException):
            fit_method("EM", data.counts, data.X, options, seed=1)
        outcome = fit_method(
            "EM", data.counts, data.X, options, seed=1, init=data.omega_star
        )
        assert outcome.method == "EM"
        assert outcome.status == STATUS_OK

    def test_mom(self, data, options):
        """MoM produces an estimate with diagnostics."""
        outcome = fit_method("MoM", data.counts, data.X, options, seed=1)
        if outcome.status == STATUS_OK:
            assert outcome.omega_hat.K == 2
            assert outcome.mom_diagnostics.projection_iters >= 0
            assert outcome.mom_diagnostics.min_hankel_eig > -1e-8
        else:
            assert outcome.status == STATUS_MOM_FAILURE

    @pytest.mark.slow
    def test_mom_ten_components_finishes(self):
        """K=10, L=50 MoM returns a status without a projection failure."""
        sc = Scenario(
            K=10, L=50, p=7000, N=10000, seed=4, methods=("MoM",), n_axis_candidates=5
        )
        data = generate_scenario(sc)
        options = FitOptions(K=10, n_axis_candidates=5)
        started = time.perf_counter()
        outcome = fit_method("MoM", data.counts, data.X, options, seed=sc.seed)
        assert time.perf_counter() - started < 300.0
        assert outcome.status in (STATUS_OK, STATUS_MOM_FAILURE)
        assert not outcome.message.startswith("projection")

    def test_random_starts_deterministic(self, data, options):
        """Random starts depend only on the seed and labels."""
        first = fit_method(
            "EM-dr-rand-2", data.counts, data.X, options, seed=5, labels=("a",)
        )
        second = fit_method(
            "EM-dr-rand-2", data.counts, data.X, options, seed=5, labels=("a",)
        )
        assert first.status == STATUS_OK
        assert np.array_equal(first.omega_hat.thetas, second.omega_hat.thetas)

    def test_all_starts_degenerate(self, data, options, monkeypatch):
        """When every start degenerates the method is degenerate."""

        def _degenerate(*args, **kwargs):
            raise NumericDegeneracyException("collapsed", iteration=1)

        monkeypatch.setattr("src.bench.methods.em_fit", _degenerate)
        outcome = fit_method("EM-rand-3", data.counts, data.X, options, seed=5)
        assert outcome.status == STATUS_DEGENERATE
        assert outcome.omega_hat is None
        assert np.isnan(outcome.loglik)

    def test_mom_failure_with_partial_result(self, data, options, monkeypatch):
        """A MoM failure carrying a partial estimate still seeds EM-MoM."""
        partial = MixtureParams(
            alpha=np.array([0.5, 0.5]), thetas=data.omega_star.thetas * 0.9
        )

        def _fail(*args, **kwargs):
            raise MomFailureException(
                "complex roots", stage="roots", partial_result=partial
            )

        monkeypatch.setattr("src.bench.methods.mom_fit", _fail)
        options = FitOptions(K=2, em_config=EmConfig(max_iters=30), select_axis=False)
        mom = run_mom(data.counts, data.X, options, seed=1)
        assert mom.status == STATUS_MOM_FAILURE
        assert mom.omega_hat is partial
        assert mom.message.startswith("roots")

        outcome = fit_method(
            "EM-MoM", data.counts, data.X, options, seed=1, mom_outcome=mom
        )
        assert outcome.method == "EM-MoM"
        assert outcome.status == STATUS_MOM_FAILURE
        assert outcome.omega_hat is not None

    def test_mom_failure_without_estimate(self, data, options):
        """EM-MoM cannot run without any MoM estimate."""
        failed = MethodOutcome(
            method="MoM", status=STATUS_MOM_FAILURE, message="projection: no"
        )
        outcome = fit_method(
            "EM-MoM", data.counts, data.X, options, seed=1, mom_outcome=failed
        )
        assert outcome.status == STATUS_MOM_FAILURE
        assert outcome.omega_hat is None
        assert outcome.message == "projection: no"

#tests/unit/test_core/test_file_utils.py
"""
Unit tests for CSV persistence.
"""

import numpy as np
import pytest

from src.core.exceptions import PersistenceException
from src.core.utils.file_utils import (
    fmt,
    read_counts,
    read_features,
    read_params,
    read_results,
    write_counts,
    write_diag,
    write_features,
    write_moments,
    write_params,
    write_results,
    write_trace,
)
from src.estimation.hermite import LatentMoments
from src.estimation.model import MixtureParams, SampleCounts


class TestFormatting:
    """Test value formatting."""

    def test_floats_round_trip(self):
        """Floats use the shortest repr that reads back exactly."""
        value = 0.1 + 0.2
        assert float(fmt(value)) == value
        assert fmt(np.float64(1.5)) == "1.5"

    def test_other_types(self):
        """Booleans are lower case and integers plain."""
        assert fmt(True) == "true"
        assert fmt(np.int64(3)) == "3"
        assert fmt("ok") == "ok"


class TestParams:
    """Test the parameter file format."""

    def test_layout(self, tmp_path, two_component):
        """Header row, values row, alpha row and one theta row per atom."""
        path = tmp_path / "truth.params"
        write_params(path, two_component)
        lines = path.read_bytes().decode("utf-8").split("\n")
        assert lines[0] == "K,L,format_version"
        assert lines[1] == "2,3,1"
        assert lines[2] == "alpha,0.3,0.7"
        assert lines[3].startswith("theta,0.8,")
        assert b"\r" not in path.read_bytes()

    def test_exact_read_back(self, tmp_path, rng):
        """Values read back bit-exactly."""
        alpha = rng.dirichlet(np.ones(3))
        omega = MixtureParams(alpha=alpha / alpha.sum(), thetas=rng.normal(size=(3, 4)))
        path = tmp_path / "est.params"
        write_params(path, omega)
        loaded = read_params(path)
        assert np.array_equal(loaded.alpha, omega.alpha)
        assert np.array_equal(loaded.thetas, omega.thetas)

    def test_wrong_version(self, tmp_path):
        """Unknown format versions are rejected."""
        path = tmp_path / "bad.params"
        path.write_text("K,L,format_version\n1,2,9\nalpha,1.0\ntheta,0.0,0.0\n")
        with pytest.raises(PersistenceException):
            read_params(path)

    def test_invalid_weights(self, tmp_path):
        """Weights that do not sum to one are a persistence error."""
        path = tmp_path / "bad.params"
        path.write_text("K,L,format_version\n1,2,1\nalpha,0.5\ntheta,0.0,0.0\n")
        with pytest.raises(PersistenceException):
            read_params(path)

    @pytest.mark.parametrize(
        "size_row", ["1,2", "1,2,1,4", "1.5,2,1", "nan,2,1", "inf,2,1", "0,2,1"]
    )
    def test_malformed_size_row(self, tmp_path, size_row):
        """A bad K,L,format_version row is a persistence error."""
        path = tmp_path / "bad.params"
        path.write_text(f"K,L,format_version\n{size_row}\nalpha,1.0\ntheta,0.0,0.0\n")
        with pytest.raises(PersistenceException):
            read_params(path)

    def test_missing_file(self, tmp_path):
        """A missing file is a persistence error naming the path."""
        with pytest.raises(PersistenceException) as exc_info:
            read_params(tmp_path / "absent.params")
        assert exc_info.value.path.endswith("absent.params")


class TestDataFiles:
    """Test features and counts files."""

    def test_features(self, tmp_path, features):
        """Features read back exactly with an x1..xL header."""
        path = tmp_path / "features.csv"
        write_features(path, features)
        assert path.read_text().splitlines()[0] == "x1,x2,x3"
        assert np.array_equal(read_features(path).rows, features.rows)

    def test_sample_counts(self, tmp_path):
        """Sample counts keep their size."""
        counts = SampleCounts.from_counts(np.array([2, 0, 6]))
        path = tmp_path / "counts.csv"
        write_counts(path, counts)
        loaded = read_counts(path)
        assert loaded.n_samples == 8
        assert np.array_equal(loaded.freq, counts.freq)

    def test_population_counts(self, tmp_path, population):
        """All-zero counts read back as population frequencies."""
        path = tmp_path / "counts.csv"
        write_counts(path, population)
        loaded = read_counts(path)
        assert loaded.population
        assert np.array_equal(loaded.freq, population.freq)

    def test_short_counts_row(self, tmp_path):
        """A counts row without all three fields names the row."""
        path = tmp_path / "counts.csv"
        path.write_text("index,count,freq\n0,2,0.5\n1,2\n")
        with pytest.raises(PersistenceException) as exc_info:
            read_counts(path)
        assert "row 3" in exc_info.value.message

    def test_malformed_number(self, tmp_path):
        """Non-numeric cells are reported."""
        path = tmp_path / "features.csv"
        path.write_text("x1\n1.0\nabc\n")
        with pytest.raises(PersistenceException):
            read_features(path)


class TestRunOutputs:
    """Test trace, diagnostics, moments and results files."""

    def test_trace(self, tmp_path):
        """The trace lists iteration and log-likelihood."""
        path = tmp_path / "trace.csv"
        write_trace(path, [-2.5, -2.25])
        assert path.read_text() == "iter,loglik\n0,-2.5\n1,-2.25\n"

    def test_diag(self, tmp_path):
        """Diagnostics follow the fixed column order."""
        path = tmp_path / "diag.csv"
        row = {
            "method": "MoM",
            "status": "ok",
            "iters": 4,
            "converged": True,
            "loglik": float("nan"),
            "projection_iters": 4,
            "min_hankel_eig": 0.25,
            "vandermonde_cond": 3.0,
            "alpha_floored": False,
        }
        write_diag(path, [row])
        assert path.read_text().splitlines()[1] == "MoM,ok,4,true,nan,4,0.25,3.0,false"

    def test_moments(self, tmp_path):
        """Axis moments come first, then the mixed moments."""
        moments = LatentMoments(
            m=np.array([1.0, 0.5]), mixed=np.array([[0.25]]), K=1, B=1.0
        )
        path = tmp_path / "moments.csv"
        write_moments(path, moments)
        assert path.read_text() == "r,m\n0,1.0\n1,0.5\ni,r0\n2,0.25\n"

    def test_results(self, tmp_path):
        """Results read back as dictionaries keyed by column."""
        path = tmp_path / "results.csv"
        write_results(
            path, ("method", "err_theta"), [("MoM", 0.125), ("EM-oracle", float("nan"))]
        )
        rows = read_results(path)
        assert rows[0] == {"method": "MoM", "err_theta": "0.125"}
        assert rows[1]["err_theta"] == "nan"

#src/estimation/model.py
"""
Core softmax-mixture representations.

A softmax mixture over the support points x_1..x_p (rows of a feature matrix)
assigns probability

    pi(x_j; omega) = sum_k alpha_k * A(x_j; theta_k),
    A(x_j; theta)  = exp(x_j' theta) / sum_i exp(x_i' theta).

All component and mixture probabilities are evaluated in log space with
max-subtraction, so logits of magnitude 1e4 do not overflow.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import log_softmax, logsumexp

from src.core.exceptions import InvalidInputException, NumericDegeneracyException
from src.core.utils.rng import SeedLike, as_generator
from src.core.utils.validation import (
    as_finite_array,
    check_positive,
    check_probability_vector,
    frozen,
)


@dataclass(frozen=True)
class FeatureMatrix:
    """The p support points of the mixture, one per row."""

    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = as_finite_array(self.rows, "rows", ndim=2)
        if rows.shape[0] < 2:
            raise InvalidInputException(
                "need at least two support points", parameter="rows"
            )
        if rows.shape[1] < 1:
            raise InvalidInputException(
                "feature dimension must be >= 1", parameter="rows"
            )
        object.__setattr__(self, "rows", frozen(rows))

    @property
    def p(self) -> int:
        return self.rows.shape[0]

    @property
    def L(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class MixtureParams:
    """Mixing weights ``alpha`` (length K) and atoms ``thetas`` (K x L)."""

    alpha: np.ndarray
    thetas: np.ndarray

    def __post_init__(self) -> None:
        alpha = check_probability_vector(self.alpha, "alpha")
        thetas = as_finite_array(self.thetas, "thetas")
        if thetas.ndim == 1:
            thetas = thetas.reshape(1, -1)
        if thetas.ndim != 2 or thetas.shape[0] != alpha.size:
            raise InvalidInputException(
                f"thetas must be K x L with K={alpha.size}, got {thetas.shape}",
                parameter="thetas",
            )
        object.__setattr__(self, "alpha", frozen(alpha))
        object.__setattr__(self, "thetas", frozen(thetas))

    @property
    def K(self) -> int:
        return self.alpha.size

    @property
    def L(self) -> int:
        return self.thetas.shape[1]

    def permuted(self, perm) -> "MixtureParams":
        """Components reordered so that component k becomes ``perm[k]``."""
        perm = np.asarray(perm, dtype=int)
        return MixtureParams(alpha=self.alpha[perm], thetas=self.thetas[perm])


@dataclass(frozen=True)
class SampleCounts:
    """Empirical frequencies over the support points.

    ``n_samples`` is the sample size N; population-limit counts use the
    sentinel ``n_samples = 0`` together with ``population = True``.
    """

    freq: np.ndarray
    n_samples: int
    population: bool = False

    def __post_init__(self) -> None:
        freq = check_probability_vector(self.freq, "freq")
        n_samples = int(self.n_samples)
        if n_samples < 0:
            raise InvalidInputException(
                "n_samples must be nonnegative", parameter="n_samples"
            )
        if n_samples == 0 and not self.population:
            raise InvalidInputException(
                "n_samples = 0 is reserved for population counts", parameter="n_samples"
            )
        object.__setattr__(self, "freq", frozen(freq))
        object.__setattr__(self, "n_samples", n_samples)

    @classmethod
    def from_counts(cls, counts) -> "SampleCounts":
        counts = np.asarray(counts)
        if counts.ndim != 1 or np.any(counts < 0):
            raise InvalidInputException(
                "counts must be a nonnegative vector", parameter="counts"
            )
        total = int(counts.sum())
        if total == 0:
            raise InvalidInputException("counts are all zero", parameter="counts")
        return cls(freq=counts / total, n_samples=total)

    @property
    def p(self) -> int:
        return self.freq.size

    @property
    def counts(self) -> np.ndarray:
        return np.rint(self.freq * self.n_samples)


def _check_theta_dims(X: FeatureMatrix, thetas: np.ndarray) -> None:
    if thetas.shape[-1] != X.L:
        raise InvalidInputException(
            f"parameter dimension {thetas.shape[-1]} does not match "
            f"feature dimension {X.L}",
            parameter="thetas",
        )


def _check_support(counts: SampleCounts, X: FeatureMatrix) -> None:
    if counts.p != X.p:
        raise InvalidInputException(
            f"counts cover {counts.p} points but X has {X.p}", parameter="counts"
        )


def component_log_pmfs(X: FeatureMatrix, thetas: np.ndarray) -> np.ndarray:
    """p x K matrix of log A(x_j; theta_k)."""
    thetas = np.atleast_2d(thetas)
    _check_theta_dims(X, thetas)
    return log_softmax(X.rows @ thetas.T, axis=0)


def log_alpha(alpha: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(alpha)


def mixture_log_pmf(X: FeatureMatrix, omega: MixtureParams) -> np.ndarray:
    """Length-p vector of log pi(x_j; omega)."""
    joint = component_log_pmfs(X, omega.thetas) + log_alpha(omega.alpha)
    return logsumexp(joint, axis=1)


def softmax_component(X: FeatureMatrix, theta) -> np.ndarray:
    """Softmax probabilities A(theta) over the support points."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or not np.all(np.isfinite(theta)):
        raise InvalidInputException("theta must be a finite vector", parameter="theta")
    return np.exp(component_log_pmfs(X, theta)[:, 0])


def mixture_pmf(X: FeatureMatrix, omega: MixtureParams) -> np.ndarray:
    """Mixture probabilities pi(x_j; omega), renormalized against rounding."""
    pmf = np.exp(mixture_log_pmf(X, omega))
    return pmf / pmf.sum()


def sample(
    X: FeatureMatrix, omega: MixtureParams, n: int, rng_seed: SeedLike
) -> SampleCounts:
    """Draw ``n`` i.i.d. categorical samples from the mixture."""
    if int(n) < 1:
        raise InvalidInputException("sample size must be >= 1", parameter="n")
    rng = as_generator(rng_seed)
    pmf = mixture_pmf(X, omega)
    counts = rng.multinomial(int(n), pmf)
    return SampleCounts.from_counts(counts)


def log_likelihood(
    counts: SampleCounts, X: FeatureMatrix, omega: MixtureParams
) -> float:
    """Sample log-likelihood sum_j freq_j log pi(x_j; omega)."""
    _check_support(counts, X)
    observed = counts.freq > 0
    log_pmf = mixture_log_pmf(X, omega)[observed]
    if not np.all(np.isfinite(log_pmf)):
        raise NumericDegeneracyException(
            "mixture assigns zero probability to an observed support point"
        )
    return float(counts.freq[observed] @ log_pmf)


def log_responsibilities(X: FeatureMatrix, omega: MixtureParams) -> np.ndarray:
    """K x p matrix of log g(theta_k | x_j; omega)."""
    weighted = component_log_pmfs(X, omega.thetas).T + log_alpha(omega.alpha)[:, None]
    normalizer = logsumexp(weighted, axis=0)
    if not np.all(np.isfinite(normalizer)):
        raise NumericDegeneracyException(
            "all mixture components vanish at a support point"
        )
    with np.errstate(under="ignore"):
        return weighted - normalizer


def responsibilities(X: FeatureMatrix, omega: MixtureParams) -> np.ndarray:
    """Posterior component probabilities; every column sums to one."""
    return np.exp(log_responsibilities(X, omega))


def param_distance(
    omega: MixtureParams,
    omega_ref: MixtureParams,
    scale_theta: float = 1.0,
    scale_alpha: Optional[float] = None,
) -> float:
    """
    Distance max(s_theta * max_k |theta_k - theta_k_ref|_2,
    |alpha - alpha_ref|_inf / s_alpha).

    Components are compared in the given order; ``scale_alpha`` defaults to
    the smallest reference weight.
    """
    if omega.K != omega_ref.K or omega.L != omega_ref.L:
        raise InvalidInputException("parameters must share K and L", parameter="omega")
    scale_theta = check_positive(scale_theta, "scale_theta")
    if scale_alpha is None:
        scale_alpha = float(omega_ref.alpha.min())
    scale_alpha = check_positive(scale_alpha, "scale_alpha")

    theta_gap = float(np.linalg.norm(omega.thetas - omega_ref.thetas, axis=1).max())
    alpha_gap = float(np.abs(omega.alpha - omega_ref.alpha).max())
    return max(scale_theta * theta_gap, alpha_gap / scale_alpha)

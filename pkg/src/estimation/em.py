#src/estimation/em.py
"""
Hybrid EM for softmax mixtures.

Each iteration updates the weights in closed form and every atom by a single
gradient-ascent step on the surrogate Q-function, with both updates evaluated
at the incoming parameters:

    alpha_k+ = sum_j freq_j g_kj
    theta_k+ = theta_k + eta * sum_j freq_j g_kj (x_j - X' A(theta_k))

where g_kj are the responsibilities at the current parameters.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from config.logging_config import get_logger
from src.core.exceptions import InvalidInputException, NumericDegeneracyException
from src.estimation.model import (
    FeatureMatrix,
    MixtureParams,
    SampleCounts,
    component_log_pmfs,
    log_likelihood,
    mixture_pmf,
    responsibilities,
)

logger = get_logger(__name__)

ALPHA_FLOOR = 1e-300


@dataclass(frozen=True)
class EmConfig:
    """Settings of the hybrid EM iteration.

    ``step_sizes`` optionally overrides ``step_size`` per component.
    """

    step_size: float = 0.2
    max_iters: int = 500
    rel_tol: float = 1e-6
    track_trace: bool = True
    step_sizes: Optional[Tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if not self.step_size > 0:
            raise InvalidInputException(
                "step_size must be positive", parameter="step_size"
            )
        if not self.rel_tol > 0:
            raise InvalidInputException("rel_tol must be positive", parameter="rel_tol")
        if int(self.max_iters) < 1:
            raise InvalidInputException("max_iters must be >= 1", parameter="max_iters")
        if self.step_sizes is not None and any(not eta > 0 for eta in self.step_sizes):
            raise InvalidInputException(
                "step_sizes must be positive", parameter="step_sizes"
            )

    def etas(self, K: int) -> np.ndarray:
        if self.step_sizes is None:
            return np.full(K, float(self.step_size))
        if len(self.step_sizes) != K:
            raise InvalidInputException(
                f"step_sizes has {len(self.step_sizes)} entries for K={K}",
                parameter="step_sizes",
            )
        return np.asarray(self.step_sizes, dtype=float)


@dataclass(frozen=True)
class EmResult:
    omega_hat: MixtureParams
    iters_used: int
    loglik_trace: List[float] = field(default_factory=list)
    converged: bool = False
    alpha_floored: bool = False

    @property
    def final_loglik(self) -> float:
        return self.loglik_trace[-1]


def _weighted_responsibilities(
    counts: SampleCounts, X: FeatureMatrix, omega: MixtureParams
) -> np.ndarray:
    """K x p matrix freq_j * g(theta_k | x_j; omega)."""
    if counts.p != X.p:
        raise InvalidInputException(
            f"counts cover {counts.p} points but X has {X.p}", parameter="counts"
        )
    return responsibilities(X, omega) * counts.freq


def q_function(
    counts: SampleCounts,
    X: FeatureMatrix,
    omega: MixtureParams,
    omega_prev: MixtureParams,
) -> float:
    """Surrogate Q(omega | omega_prev) with responsibilities taken at ``omega_prev``."""
    if omega.K != omega_prev.K or omega.L != omega_prev.L:
        raise InvalidInputException("parameters must share K and L", parameter="omega")
    weights = _weighted_responsibilities(counts, X, omega_prev)
    mass = weights.sum(axis=1)
    if np.any((omega.alpha == 0) & (mass > 0)):
        raise NumericDegeneracyException(
            "zero weight on a component carrying responsibility"
        )

    log_A = component_log_pmfs(X, omega.thetas)
    carried = mass > 0
    weight_term = mass[carried] @ np.log(omega.alpha[carried])
    atom_term = float(np.sum(weights * log_A.T))
    return float(weight_term + atom_term)


def update_alpha(
    counts: SampleCounts, X: FeatureMatrix, omega: MixtureParams
) -> np.ndarray:
    """Closed-form weight update sum_j freq_j g(theta_k | x_j; omega)."""
    alpha = _weighted_responsibilities(counts, X, omega).sum(axis=1)
    return alpha / alpha.sum()


def _q_gradients(
    weights: np.ndarray, X: FeatureMatrix, thetas: np.ndarray
) -> np.ndarray:
    # sum_j w_kj x_j - (sum_j w_kj) X' A(theta_k), for every k at once
    A = np.exp(component_log_pmfs(X, thetas))
    return weights @ X.rows - weights.sum(axis=1)[:, None] * (A.T @ X.rows)


def grad_q_theta(
    counts: SampleCounts, X: FeatureMatrix, omega: MixtureParams, k: int
) -> np.ndarray:
    """Gradient of Q(. | omega) in theta_k, evaluated at omega."""
    if not 0 <= k < omega.K:
        raise InvalidInputException(f"component index {k} out of range", parameter="k")
    weights = _weighted_responsibilities(counts, X, omega)
    return _q_gradients(weights[k : k + 1], X, omega.thetas[k : k + 1])[0]


def em_step(
    counts: SampleCounts, X: FeatureMatrix, omega: MixtureParams, config: EmConfig
) -> MixtureParams:
    """One hybrid EM iteration; weights and atoms both use the incoming omega."""
    weights = _weighted_responsibilities(counts, X, omega)
    alpha = weights.sum(axis=1)
    alpha = alpha / alpha.sum()
    gradients = _q_gradients(weights, X, omega.thetas)
    thetas = omega.thetas + config.etas(omega.K)[:, None] * gradients
    return MixtureParams(alpha=alpha, thetas=thetas)


def _floor_alpha(omega: MixtureParams) -> Tuple[MixtureParams, bool]:
    if np.all(omega.alpha >= ALPHA_FLOOR):
        return omega, False
    alpha = np.maximum(omega.alpha, ALPHA_FLOOR)
    return MixtureParams(alpha=alpha / alpha.sum(), thetas=omega.thetas), True


def _checked_loglik(
    counts: SampleCounts, X: FeatureMatrix, omega: MixtureParams, iteration: int
) -> float:
    try:
        value = log_likelihood(counts, X, omega)
    except NumericDegeneracyException as exc:
        raise NumericDegeneracyException(
            f"log-likelihood degenerated at iteration {iteration}: {exc.message}",
            iteration=iteration,
        ) from exc
    if not np.isfinite(value):
        raise NumericDegeneracyException(
            f"non-finite log-likelihood at iteration {iteration}", iteration=iteration
        )
    return value


def em_fit(
    counts: SampleCounts, X: FeatureMatrix, omega0: MixtureParams, config: EmConfig
) -> EmResult:
    """
    Iterate ``em_step`` until the relative log-likelihood change
    |l_t - l_{t-1}| / max(1, |l_{t-1}|) drops below ``rel_tol`` or
    ``max_iters`` is reached.
    """
    omega, floored = _floor_alpha(omega0)
    if floored:
        logger.warning(
            f"initial weights floored at {ALPHA_FLOOR:.0e} before taking logs"
        )

    previous = _checked_loglik(counts, X, omega, iteration=0)
    trace = [previous]
    converged = False
    iters_used = 0

    for t in range(1, int(config.max_iters) + 1):
        omega = em_step(counts, X, omega, config)
        current = _checked_loglik(counts, X, omega, iteration=t)
        iters_used = t
        if config.track_trace:
            trace.append(current)
        change = abs(current - previous) / max(1.0, abs(previous))
        logger.debug(
            f"iteration {t} | loglik={current:.10f} | rel_change={change:.3e}"
        )
        previous = current
        if change < config.rel_tol:
            converged = True
            break

    if not config.track_trace:
        trace = [previous]
    logger.info(
        f"EM finished | iters={iters_used} | converged={converged} "
        f"| loglik={previous:.8f}"
    )
    return EmResult(
        omega_hat=omega,
        iters_used=iters_used,
        loglik_trace=trace,
        converged=converged,
        alpha_floored=floored,
    )


def population_counts(X: FeatureMatrix, omega_star: MixtureParams) -> SampleCounts:
    """Population-limit frequencies freq = pi(omega_star)."""
    return SampleCounts(freq=mixture_pmf(X, omega_star), n_samples=0, population=True)

#src/bench/methods.py
"""
The estimation methods compared by the benchmark, behind one entry point.

``fit_method`` is shared by the benchmark cells and the ``fit`` command. It
never raises for method failures: a MoM failure or a degenerate EM run is
reported through ``MethodOutcome.status``.
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Union

import numpy as np

from config.logging_config import get_logger, log_fit_progress
from src.bench.scenario import MethodSpec, parse_method
from src.core.exceptions import (
    AxisSelectionException,
    InvalidInputException,
    MomFailureException,
    NumericDegeneracyException,
)
from src.core.utils.file_utils import read_matrix
from src.core.utils.rng import substream
from src.estimation.em import EmConfig, EmResult, em_fit
from src.estimation.model import FeatureMatrix, MixtureParams, SampleCounts
from src.estimation.mom import MomDiagnostics, MomResult, mom_fit
from src.estimation.subspace import (
    estimate_gamma,
    projected_direction,
    random_inits,
    select_axis,
    top_eigenspace,
)

logger = get_logger(__name__)

STATUS_OK = "ok"
STATUS_MOM_FAILURE = "mom-failure"
STATUS_DEGENERATE = "degenerate"


@dataclass(frozen=True)
class FitOptions:
    K: int
    B: float = 1.0
    em_config: EmConfig = field(default_factory=EmConfig)
    m_inits: int = 10
    n_axis_candidates: int = 200
    select_axis: bool = True
    Sigma: Optional[np.ndarray] = None
    degree_cap: Optional[int] = None


@dataclass(frozen=True)
class MethodOutcome:
    method: str
    status: str
    omega_hat: Optional[MixtureParams] = None
    iters: int = 0
    loglik_trace: List[float] = field(default_factory=list)
    converged: bool = False
    alpha_floored: bool = False
    mom: Optional[MomResult] = None
    message: str = ""

    @property
    def loglik(self) -> float:
        return self.loglik_trace[-1] if self.loglik_trace else float("nan")

    @property
    def mom_diagnostics(self) -> MomDiagnostics:
        return self.mom.diagnostics if self.mom is not None else MomDiagnostics()


def resolve_sigma(
    sigma: Union[str, np.ndarray, None], X: FeatureMatrix
) -> Optional[np.ndarray]:
    """``identity`` -> None, ``sample`` -> X'X / p, any other string is a CSV path."""
    if sigma is None or (isinstance(sigma, str) and sigma == "identity"):
        return None
    if isinstance(sigma, str):
        if sigma == "sample":
            return X.rows.T @ X.rows / X.p
        matrix = read_matrix(sigma)
    else:
        matrix = np.asarray(sigma, dtype=float)
    if matrix.shape != (X.L, X.L):
        raise InvalidInputException(
            f"covariance must be {X.L} x {X.L}, got {matrix.shape}", parameter="sigma"
        )
    return matrix


def _subspace_basis(
    counts: SampleCounts, X: FeatureMatrix, options: FitOptions
) -> np.ndarray:
    gamma = estimate_gamma(counts, X, options.Sigma)
    return top_eigenspace(gamma, options.K).V_hat


def _em_outcome(
    method: str, result: EmResult, status: str = STATUS_OK
) -> MethodOutcome:
    return MethodOutcome(
        method=method,
        status=status,
        omega_hat=result.omega_hat,
        iters=result.iters_used,
        loglik_trace=list(result.loglik_trace),
        converged=result.converged,
        alpha_floored=result.alpha_floored,
    )


def run_mom(
    counts: SampleCounts,
    X: FeatureMatrix,
    options: FitOptions,
    seed: int,
    labels: Sequence = (),
) -> MethodOutcome:
    """Subspace, axis choice, then the moment pipeline."""
    V_hat = _subspace_basis(counts, X, options)
    axis_rng = substream(seed, *labels, "MoM", "axis")
    try:
        if options.select_axis:
            v = select_axis(
                counts,
                X,
                V_hat,
                options.K,
                options.B,
                options.n_axis_candidates,
                axis_rng,
            )
        else:
            v = projected_direction(V_hat, axis_rng)
        result = mom_fit(
            counts,
            X,
            options.K,
            options.B,
            v,
            Sigma=options.Sigma,
            degree_cap=options.degree_cap,
        )
    except AxisSelectionException as exc:
        logger.warning(f"MoM failed at axis selection: {exc.message}")
        return MethodOutcome(
            method="MoM", status=STATUS_MOM_FAILURE, message=exc.message
        )
    except MomFailureException as exc:
        logger.warning(f"MoM failed at stage {exc.stage}: {exc.message}")
        return MethodOutcome(
            method="MoM",
            status=STATUS_MOM_FAILURE,
            omega_hat=exc.partial_result,
            message=f"{exc.stage}: {exc.message}",
        )
    return MethodOutcome(
        method="MoM",
        status=STATUS_OK,
        omega_hat=result.omega_hat,
        iters=result.diagnostics.projection_iters,
        converged=True,
        mom=result,
    )


def _run_em(
    method: str,
    counts: SampleCounts,
    X: FeatureMatrix,
    omega0: MixtureParams,
    config: EmConfig,
    status: str = STATUS_OK,
) -> MethodOutcome:
    try:
        return _em_outcome(method, em_fit(counts, X, omega0, config), status)
    except NumericDegeneracyException as exc:
        logger.warning(f"{method} degenerated: {exc.message}")
        return MethodOutcome(
            method=method, status=STATUS_DEGENERATE, message=exc.message
        )


def _run_random_starts(
    spec: MethodSpec,
    counts: SampleCounts,
    X: FeatureMatrix,
    options: FitOptions,
    seed: int,
    labels: Sequence,
) -> MethodOutcome:
    if spec.init_mode == "dr":
        V_hat = _subspace_basis(counts, X, options)
    else:
        V_hat = np.eye(X.L)
    rng = substream(seed, *labels, spec.family, "inits")
    starts = random_inits(V_hat, options.K, spec.n_inits, spec.init_mode, rng)

    best: Optional[EmResult] = None
    for index, omega0 in enumerate(starts):
        try:
            result = em_fit(counts, X, omega0, options.em_config)
        except NumericDegeneracyException as exc:
            logger.debug(f"{spec.name} start {index} degenerated: {exc.message}")
            continue
        if best is None or result.final_loglik > best.final_loglik:
            best = result

    if best is None:
        return MethodOutcome(
            method=spec.name,
            status=STATUS_DEGENERATE,
            message=f"all {len(starts)} starts degenerated",
        )
    return _em_outcome(spec.name, best)


def fit_method(
    method: Union[str, MethodSpec],
    counts: SampleCounts,
    X: FeatureMatrix,
    options: FitOptions,
    seed: int,
    labels: Sequence = (),
    omega_star: Optional[MixtureParams] = None,
    init: Optional[MixtureParams] = None,
    mom_outcome: Optional[MethodOutcome] = None,
) -> MethodOutcome:
    """
    Run one estimation method and report its status instead of raising.

    Args:
        method: Method name (or parsed spec); plain ``EM`` runs from ``init``.
        counts: Observed counts over the support.
        X: Feature matrix of the support.
        options: K, bounds, EM settings and axis-selection settings.
        seed: Base seed of the random substreams.
        labels: Substream labels under ``seed``, e.g. the replicate.
        omega_star: True parameters, needed by ``EM-oracle``.
        init: Starting point for plain ``EM``.
        mom_outcome: A MoM run on the same data for MoM and EM-MoM to reuse.

    Returns:
        MethodOutcome: Estimate (or None), status, iterations and trace.
    """
    if isinstance(method, MethodSpec):
        spec = method
    elif method == "EM":
        spec = MethodSpec(name="EM", family="EM")
    else:
        spec = parse_method(method, options.m_inits)
    log_fit_progress(spec.name, "start", K=options.K, L=X.L, p=X.p)

    if spec.family == "MoM":
        outcome = mom_outcome or run_mom(counts, X, options, seed, labels)
    elif spec.family == "EM-MoM":
        mom = mom_outcome or run_mom(counts, X, options, seed, labels)
        if mom.omega_hat is None:
            outcome = MethodOutcome(
                method=spec.name, status=STATUS_MOM_FAILURE, message=mom.message
            )
        else:
            outcome = _run_em(
                spec.name, counts, X, mom.omega_hat, options.em_config, mom.status
            )
            outcome = replace(outcome, mom=mom.mom)
    elif spec.family == "EM-oracle":
        if omega_star is None:
            raise InvalidInputException(
                "EM-oracle needs the true parameters", parameter="omega_star"
            )
        outcome = _run_em(spec.name, counts, X, omega_star, options.em_config)
    elif spec.family == "EM":
        if init is None:
            raise InvalidInputException(
                "EM needs an initial parameter file", parameter="init"
            )
        outcome = _run_em(spec.name, counts, X, init, options.em_config)
    else:
        outcome = _run_random_starts(spec, counts, X, options, seed, labels)

    if outcome.method != spec.name:
        outcome = replace(outcome, method=spec.name)
    log_fit_progress(spec.name, "done", status=outcome.status, iters=outcome.iters)
    return outcome

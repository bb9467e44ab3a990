#src/estimation/subspace.py
"""
Second-moment subspace estimation and the directions drawn from it.

Under mu = N(0, Sigma) the matrix

    Gamma_hat = sum_j freq_j (Sigma^{-1} x_j)(Sigma^{-1} x_j)' - Sigma^{-1}

estimates sum_k alpha_k theta_k theta_k', whose top-K eigenspace contains the
atoms. Projection axes and EM starting points are drawn inside that span.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import linalg

from config.logging_config import get_logger, log_fit_progress
from src.core.exceptions import (
    AxisSelectionException,
    InvalidInputException,
    NumericDegeneracyException,
    ProjectionFailureException,
)
from src.core.utils.rng import SeedLike, as_generator
from src.core.utils.validation import as_finite_array, check_spd, frozen
from src.estimation.hermite import check_degree, hermite_table
from src.estimation.model import FeatureMatrix, MixtureParams, SampleCounts
from src.estimation.mom import HankelPair, project_to_valid_moments

logger = get_logger(__name__)

MAX_DIRECTION_RETRIES = 16
INIT_MODES = ("dr", "rand")


@dataclass(frozen=True)
class SubspaceEstimate:
    gamma_hat: np.ndarray
    V_hat: np.ndarray
    eigvals: np.ndarray

    def __post_init__(self) -> None:
        V_hat = as_finite_array(self.V_hat, "V_hat", ndim=2)
        eigvals = as_finite_array(self.eigvals, "eigvals", ndim=1)
        if V_hat.shape[1] != eigvals.size:
            raise InvalidInputException(
                "one eigenvalue per column of V_hat", parameter="eigvals"
            )
        object.__setattr__(self, "gamma_hat", frozen(self.gamma_hat))
        object.__setattr__(self, "V_hat", frozen(V_hat))
        object.__setattr__(self, "eigvals", frozen(eigvals))

    @property
    def K(self) -> int:
        return self.V_hat.shape[1]


def estimate_gamma(counts: SampleCounts, X: FeatureMatrix, Sigma=None) -> np.ndarray:
    """Frequency-weighted Gamma_hat; ``Sigma=None`` means the identity."""
    if counts.p != X.p:
        raise InvalidInputException(
            f"counts cover {counts.p} points but X has {X.p}", parameter="counts"
        )
    if Sigma is None:
        whitened = X.rows
        sigma_inv = np.eye(X.L)
    else:
        Sigma = check_spd(Sigma)
        if Sigma.shape[0] != X.L:
            raise InvalidInputException("Sigma does not match X", parameter="Sigma")
        factor = linalg.cho_factor(Sigma)
        whitened = linalg.cho_solve(factor, X.rows.T).T
        sigma_inv = linalg.cho_solve(factor, np.eye(X.L))

    gamma = (whitened * counts.freq[:, None]).T @ whitened - sigma_inv
    return 0.5 * (gamma + gamma.T)


def top_eigenspace(gamma_hat, K: int) -> SubspaceEstimate:
    """Top-K eigenpairs, descending; each eigenvector's largest |entry| is positive."""
    gamma_hat = as_finite_array(gamma_hat, "gamma_hat", ndim=2)
    L = gamma_hat.shape[0]
    if gamma_hat.shape != (L, L):
        raise InvalidInputException("gamma_hat must be square", parameter="gamma_hat")
    if not 1 <= int(K) <= L:
        raise InvalidInputException(f"K must lie in [1, {L}]", parameter="K")
    K = int(K)
    try:
        eigvals, eigvecs = linalg.eigh(gamma_hat, subset_by_index=[L - K, L - 1])
    except linalg.LinAlgError as exc:
        raise NumericDegeneracyException(f"eigendecomposition failed: {exc}") from exc

    eigvals = eigvals[::-1]
    V = eigvecs[:, ::-1]
    pivots = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[pivots, np.arange(K)])
    signs[signs == 0] = 1.0
    return SubspaceEstimate(gamma_hat=gamma_hat, V_hat=V * signs, eigvals=eigvals)


def projected_direction(V_hat, rng_seed: SeedLike) -> np.ndarray:
    """Unit vector V V' u / |V V' u| with u ~ N(0, I_L)."""
    V_hat = as_finite_array(V_hat, "V_hat", ndim=2)
    rng = as_generator(rng_seed)
    for _ in range(MAX_DIRECTION_RETRIES):
        u = rng.standard_normal(V_hat.shape[0])
        v = V_hat @ (V_hat.T @ u)
        norm = float(np.linalg.norm(v))
        if norm >= 1e-12:
            return v / norm
    raise NumericDegeneracyException(
        f"no usable projection direction after {MAX_DIRECTION_RETRIES} draws"
    )


def _axis_hankel_det(
    counts: SampleCounts, X: FeatureMatrix, v: np.ndarray, K: int, B: float
) -> float:
    m = hermite_table(2 * K - 1, X.rows @ v) @ counts.freq
    m[0] = 1.0
    m_tilde = project_to_valid_moments(m, B, quiet=True)
    return float(np.linalg.det(HankelPair.from_moments(m_tilde).H))


def select_axis(
    counts: SampleCounts,
    X: FeatureMatrix,
    V_hat,
    K: int,
    B: float,
    n_candidates: int,
    rng_seed: SeedLike,
    candidates: Optional[Sequence[np.ndarray]] = None,
) -> np.ndarray:
    """
    Choose, among random directions in span(V_hat), the one whose projected
    moment Hankel matrix has the largest determinant, i.e. the axis along
    which the atoms are most separated. ``candidates`` replaces the random
    draws.
    """
    K = check_degree(K)
    if candidates is None:
        if int(n_candidates) < 1:
            raise InvalidInputException(
                "n_candidates must be >= 1", parameter="n_candidates"
            )
        rng = as_generator(rng_seed)
        candidates = [projected_direction(V_hat, rng) for _ in range(int(n_candidates))]
    candidates = [np.asarray(c, dtype=float) for c in candidates]
    if not candidates:
        raise InvalidInputException("no candidate axes given", parameter="candidates")

    best_index, best_det = -1, -np.inf
    for index, v in enumerate(candidates):
        try:
            det = _axis_hankel_det(counts, X, v, K, B)
        except ProjectionFailureException:
            logger.debug(f"candidate axis {index} skipped: projection failed")
            continue
        if det > best_det:
            best_index, best_det = index, det

    if best_index < 0:
        raise AxisSelectionException(
            f"all {len(candidates)} candidate axes failed moment projection",
            n_candidates=len(candidates),
        )
    log_fit_progress("MoM", "axis", candidate=best_index, det=f"{best_det:.4e}")
    return candidates[best_index]


def random_inits(
    V_hat, K: int, m: int, mode: str, rng_seed: SeedLike
) -> List[MixtureParams]:
    """
    ``m`` random EM starting points with uniform weights.

    "dr" draws each atom uniformly on the unit sphere of span(V_hat); "rand"
    draws ambient atoms with i.i.d. N(0, 1/sqrt(L)) entries.
    """
    if mode not in INIT_MODES:
        raise InvalidInputException(f"unknown init mode {mode!r}", parameter="mode")
    if int(m) < 1 or int(K) < 1:
        raise InvalidInputException("m and K must be >= 1", parameter="m")
    V_hat = as_finite_array(V_hat, "V_hat", ndim=2)
    L, d = V_hat.shape
    K, m = int(K), int(m)
    rng = as_generator(rng_seed)
    alpha = np.full(K, 1.0 / K)

    inits = []
    for _ in range(m):
        if mode == "dr":
            g = rng.standard_normal((K, d))
            thetas = g @ V_hat.T
            thetas /= np.linalg.norm(thetas, axis=1, keepdims=True)
        else:
            thetas = rng.normal(0.0, L ** -0.25, size=(K, L))
        inits.append(MixtureParams(alpha=alpha, thetas=thetas))
    return inits


def subspace_angles(A, B) -> np.ndarray:
    """Principal angles (radians, descending) between the column spans of A and B."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    A = A.reshape(-1, 1) if A.ndim == 1 else A
    B = B.reshape(-1, 1) if B.ndim == 1 else B
    return linalg.subspace_angles(A, B)

#src/estimation/hermite.py
"""
Hermite polynomials and latent-moment estimators.

For a base measure mu = N(0, I_L) the probabilist's Hermite polynomials turn
softmax-mixture frequencies into unbiased moments of the mixing measure
projected on an axis v:

    m_r        = sum_j freq_j H_r(x_j'v)                 (r = 0..2K-1)
    m_{r1;i}   = sum_j freq_j H_r(x_j'v) (x_j'w_i)       (r = 0..K-1, i = 2..L)

A general covariance N(0, Sigma) is handled by rescaling the recovered atoms.
"""

from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from config.settings import get_settings
from src.core.exceptions import InvalidInputException, UnsupportedDegreeException
from src.core.utils.validation import as_finite_array, check_positive, check_spd, frozen
from src.estimation.model import FeatureMatrix, MixtureParams, SampleCounts

FRAME_TOL = 1e-10


@dataclass(frozen=True)
class AxisFrame:
    """Primary axis ``v`` and columns ``W`` completing it to an orthonormal basis."""

    v: np.ndarray
    W: np.ndarray

    def __post_init__(self) -> None:
        v = as_finite_array(self.v, "v", ndim=1)
        W = as_finite_array(self.W, "W", ndim=2)
        if W.shape != (v.size, v.size - 1):
            raise InvalidInputException(
                f"W must be {v.size} x {v.size - 1}, got {W.shape}", parameter="W"
            )
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise InvalidInputException("v must be a unit vector", parameter="v")
        R = np.column_stack([v, W])
        if not np.allclose(R.T @ R, np.eye(v.size), atol=FRAME_TOL, rtol=0.0):
            raise InvalidInputException("[v | W] is not orthonormal", parameter="W")
        object.__setattr__(self, "v", frozen(v))
        object.__setattr__(self, "W", frozen(W))

    @property
    def L(self) -> int:
        return self.v.size

    @property
    def rotation(self) -> np.ndarray:
        return np.column_stack([self.v, self.W])


@dataclass(frozen=True)
class LatentMoments:
    """Axis moments ``m`` (length 2K) and mixed moments (``(L-1) x K``)."""

    m: np.ndarray
    mixed: np.ndarray
    K: int
    B: float

    def __post_init__(self) -> None:
        m = as_finite_array(self.m, "m", ndim=1)
        mixed = as_finite_array(self.mixed, "mixed", ndim=2)
        K = int(self.K)
        if m.size != 2 * K:
            raise InvalidInputException(f"m must have {2 * K} entries", parameter="m")
        if mixed.shape[1] != K:
            raise InvalidInputException(
                f"mixed must have {K} columns", parameter="mixed"
            )
        if abs(m[0] - 1.0) > 1e-12:
            raise InvalidInputException("m[0] must equal 1", parameter="m")
        object.__setattr__(self, "m", frozen(m))
        object.__setattr__(self, "mixed", frozen(mixed))
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "B", check_positive(self.B, "B"))

    def with_axis_moments(self, m: np.ndarray) -> "LatentMoments":
        return LatentMoments(m=m, mixed=self.mixed, K=self.K, B=self.B)


def hermite_eval(r: int, x):
    """Probabilist's Hermite polynomial H_r at ``x`` (scalar or array)."""
    if int(r) < 0:
        raise InvalidInputException("degree must be nonnegative", parameter="r")
    return hermite_table(int(r), x)[int(r)]


def hermite_table(max_degree: int, x) -> np.ndarray:
    """Stack H_0(x), ..., H_max_degree(x) via H_{r+1} = x H_r - r H_{r-1}."""
    x = np.asarray(x, dtype=float)
    table = np.empty((max_degree + 1,) + x.shape)
    table[0] = 1.0
    if max_degree >= 1:
        table[1] = x
    for r in range(1, max_degree):
        table[r + 1] = x * table[r] - r * table[r - 1]
    return table


class LatentBasis(Protocol):
    """Polynomials h_r whose expectations under the base measure give latent moments."""

    def axis_table(self, projections: np.ndarray, max_degree: int) -> np.ndarray:
        ...


class StandardNormalBasis:
    """h_r(x) = H_r(x'v), valid for mu = N(0, I_L)."""

    def axis_table(self, projections: np.ndarray, max_degree: int) -> np.ndarray:
        return hermite_table(max_degree, projections)


def check_degree(K: int, degree_cap: Optional[int] = None) -> int:
    K = int(K)
    if K < 1:
        raise InvalidInputException("K must be >= 1", parameter="K")
    cap = get_settings().degree_cap if degree_cap is None else int(degree_cap)
    degree = 2 * K - 1
    if degree > cap:
        raise UnsupportedDegreeException(
            f"moment degree {degree} exceeds the cap {cap} (K={K})",
            degree=degree,
            cap=cap,
        )
    return K


def estimate_moments(
    counts: SampleCounts,
    X: FeatureMatrix,
    frame: AxisFrame,
    K: int,
    B: float,
    degree_cap: Optional[int] = None,
    basis: Optional[LatentBasis] = None,
) -> LatentMoments:
    """Frequency-weighted latent moments along ``frame.v``."""
    K = check_degree(K, degree_cap)
    if counts.p != X.p:
        raise InvalidInputException(
            f"counts cover {counts.p} points but X has {X.p}", parameter="counts"
        )
    if frame.L != X.L:
        raise InvalidInputException(
            "frame dimension does not match X", parameter="frame"
        )
    basis = basis or StandardNormalBasis()

    table = basis.axis_table(X.rows @ frame.v, 2 * K - 1)  # (2K) x p
    m = table @ counts.freq
    m[0] = 1.0
    other = X.rows @ frame.W  # p x (L-1)
    mixed = (table[:K] * counts.freq) @ other
    return LatentMoments(m=m, mixed=mixed.T, K=K, B=B)


def population_latent_moments(
    omega_star: MixtureParams, frame: AxisFrame, K: int, B: float = 1.0
) -> LatentMoments:
    """Exact moments of the mixing measure seen through ``frame``."""
    K = int(K)
    if K < 1:
        raise InvalidInputException("K must be >= 1", parameter="K")
    if omega_star.L != frame.L:
        raise InvalidInputException(
            "frame dimension does not match omega", parameter="frame"
        )
    axis = omega_star.thetas @ frame.v
    powers = axis[None, :] ** np.arange(2 * K)[:, None]  # (2K) x K_star
    m = powers @ omega_star.alpha
    m[0] = 1.0
    other = omega_star.thetas @ frame.W  # K_star x (L-1)
    mixed = (powers[:K] * omega_star.alpha) @ other
    return LatentMoments(m=m, mixed=mixed.T, K=K, B=B)


def rescale_for_covariance(thetas, Sigma) -> np.ndarray:
    """Map each atom row theta to Sigma^{-1} theta."""
    Sigma = check_spd(Sigma)
    thetas = np.atleast_2d(as_finite_array(thetas, "thetas"))
    if thetas.shape[1] != Sigma.shape[0]:
        raise InvalidInputException(
            "Sigma does not match the atom dimension", parameter="Sigma"
        )
    factor = cho_factor(Sigma)
    return cho_solve(factor, thetas.T).T

#src/bench/metrics.py
"""Permutation-matched estimation errors."""

from itertools import permutations
from typing import Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.core.exceptions import InvalidInputException

EXHAUSTIVE_MAX_K = 8


def match_components(theta_true, theta_hat) -> Tuple[float, np.ndarray]:
    """
    Best matching of estimated atoms to true atoms.

    Returns (Err_theta, perm) where perm[k] is the estimated component paired
    with true component k and Err_theta = sqrt(mean_k |theta_k - hat_perm[k]|^2).
    """
    theta_true = np.atleast_2d(np.asarray(theta_true, dtype=float))
    theta_hat = np.atleast_2d(np.asarray(theta_hat, dtype=float))
    if theta_true.shape != theta_hat.shape:
        raise InvalidInputException(
            f"shape mismatch: {theta_true.shape} vs {theta_hat.shape}",
            parameter="theta_hat",
        )
    K = theta_true.shape[0]
    cost = ((theta_true[:, None, :] - theta_hat[None, :, :]) ** 2).sum(axis=2)

    if K <= EXHAUSTIVE_MAX_K:
        rows = np.arange(K)
        best_perm, best_cost = None, np.inf
        for perm in permutations(range(K)):
            total = cost[rows, perm].sum()
            if total < best_cost:
                best_perm, best_cost = perm, total
        perm = np.asarray(best_perm, dtype=int)
    else:
        _, perm = linear_sum_assignment(cost)

    return float(np.sqrt(cost[np.arange(K), perm].sum() / K)), perm


def err_theta(theta_true, theta_hat) -> float:
    return match_components(theta_true, theta_hat)[0]


def err_alpha(alpha_true, alpha_hat, perm) -> float:
    """l1 weight error under the atom matching ``perm`` (not re-optimized)."""
    alpha_true = np.asarray(alpha_true, dtype=float)
    alpha_hat = np.asarray(alpha_hat, dtype=float)
    perm = np.asarray(perm, dtype=int)
    if alpha_true.shape != alpha_hat.shape or perm.shape != alpha_true.shape:
        raise InvalidInputException(
            "weights and permutation must share length K", parameter="perm"
        )
    return float(np.abs(alpha_true - alpha_hat[perm]).sum())

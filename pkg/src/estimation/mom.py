#src/estimation/mom.py
"""
Method-of-moments recovery of a softmax mixture from latent moments.

Pipeline, executed in the frame of a primary axis v and rotated back:

1. estimate the axis moments m_0..m_{2K-1} and the mixed moments;
2. project the axis moments onto the set of valid moment sequences of a
   K-atomic measure on [-B, B];
3. recover the axis coordinates of the atoms as roots of the orthogonal
   polynomial defined by the projected Hankel system;
4. recover the remaining coordinates and the weights from Vandermonde solves.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import linalg

from config.logging_config import get_logger, log_fit_progress
from config.settings import get_settings
from src.core.exceptions import (
    ComplexRootException,
    DegenerateMomentsException,
    InvalidInputException,
    MomFailureException,
    ProjectionFailureException,
)
from src.core.utils.validation import as_finite_array, check_positive
from src.estimation.hermite import (
    AxisFrame,
    LatentMoments,
    estimate_moments,
    rescale_for_covariance,
)
from src.estimation.model import FeatureMatrix, MixtureParams, SampleCounts

logger = get_logger(__name__)

HANKEL_COND_LIMIT = 1e12
IMAG_TOL = 1e-6
PINV_RTOL = 1e-10
ROOT_SLACK = 1e-8
FEASIBILITY_TOL = 1e-8
CURVE_GRID_SIZE = 2001
NODE_TOL = 1e-12
NEWTON_STEPS = 8
WEIGHT_TOL = 1e-14


@dataclass(frozen=True)
class HankelPair:
    """H = [m_{i+j}] and the shifted S = [m_{i+j+1}], both K x K."""

    H: np.ndarray
    S: np.ndarray

    @classmethod
    def from_moments(cls, m) -> "HankelPair":
        m = np.asarray(m, dtype=float)
        if m.ndim != 1 or m.size < 2 or m.size % 2:
            raise InvalidInputException(
                "moment vector must have even length 2K", parameter="m"
            )
        K = m.size // 2
        H = linalg.hankel(m[:K], m[K - 1 : 2 * K - 1])
        S = linalg.hankel(m[1 : K + 1], m[K : 2 * K])
        return cls(H=H, S=S)

    @property
    def K(self) -> int:
        return self.H.shape[0]

    def localizing(self, B: float) -> Tuple[np.ndarray, np.ndarray]:
        return B * self.H + self.S, B * self.H - self.S


@dataclass(frozen=True)
class MomDiagnostics:
    projection_iters: int = 0
    min_hankel_eig: float = float("nan")
    vandermonde_cond: float = float("nan")


@dataclass(frozen=True)
class MomResult:
    omega_hat: MixtureParams
    roots: np.ndarray
    projected_moments: LatentMoments
    diagnostics: MomDiagnostics
    frame: Optional[AxisFrame] = None


@dataclass(frozen=True)
class ProjectionOutcome:
    moments: np.ndarray
    iterations: int
    min_eigenvalue: float
    converged: bool


def moment_curve(t, n: int) -> np.ndarray:
    """Rows (1, t, ..., t^{n-1}) for each entry of ``t``."""
    return np.vander(np.atleast_1d(np.asarray(t, dtype=float)), n, increasing=True)


class CurveOracle:
    """
    Minimizes the polynomial t -> <c, (t, ..., t^{n-1})> over [-B, B].

    The best point of a fixed grid is polished by Newton steps on the
    derivative and kept only if it improves the grid value.
    """

    def __init__(self, n: int, B: float, grid_size: int = CURVE_GRID_SIZE):
        self.n = n
        self.B = B
        self.grid = np.linspace(-B, B, grid_size)
        self._grid_curve = moment_curve(self.grid, n)[:, 1:]

    def _polish(self, c: np.ndarray, t: float) -> float:
        coefs = np.concatenate([[0.0], c])
        first = P.polyder(coefs)
        second = P.polyder(first)
        for _ in range(NEWTON_STEPS):
            curvature = float(P.polyval(t, second))
            if curvature <= 0.0:
                break
            step = float(P.polyval(t, first)) / curvature
            t = float(np.clip(t - step, -self.B, self.B))
            if abs(step) <= NODE_TOL * self.B:
                break
        return t

    def __call__(self, c: np.ndarray) -> float:
        start = float(self.grid[int(np.argmin(self._grid_curve @ c))])
        candidates = np.array([start, self._polish(c, start)])
        values = moment_curve(candidates, self.n)[:, 1:] @ c
        return float(candidates[int(np.argmin(values))])


def _affine_minimizer(points: np.ndarray) -> np.ndarray:
    """Weights w with sum 1 minimizing |points @ w| (columns are points)."""
    if points.shape[1] == 1:
        return np.ones(1)
    base = points[:, 0]
    z = linalg.lstsq(points[:, 1:] - base[:, None], -base)[0]
    return np.concatenate([[1.0 - z.sum()], z])


def _corrective_step(
    nodes: np.ndarray, weights: np.ndarray, points: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Wolfe's minor cycle: move towards the affine minimizer, dropping points."""
    while True:
        affine = _affine_minimizer(points)
        if np.all(affine > WEIGHT_TOL):
            return nodes, affine, points
        # step until the first weight hits zero, then drop it
        blocking = np.flatnonzero(affine <= WEIGHT_TOL)
        drop = weights[blocking] - affine[blocking]
        ratios = np.divide(
            weights[blocking], drop, out=np.zeros(blocking.size), where=drop > 0
        )
        first = int(np.argmin(ratios))
        step = float(np.clip(ratios[first], 0.0, 1.0))
        weights = step * affine + (1.0 - step) * weights
        weights[blocking[first]] = 0.0
        keep = weights > WEIGHT_TOL
        nodes, weights, points = nodes[keep], weights[keep], points[:, keep]
        weights = weights / weights.sum()


def localizing_min_eigenvalue(m, B: float) -> float:
    """Smallest eigenvalue over B H + S and B H - S."""
    upper, lower = HankelPair.from_moments(m).localizing(B)
    return float(min(linalg.eigvalsh(upper)[0], linalg.eigvalsh(lower)[0]))


def solve_moment_projection(
    m,
    B: float,
    max_iters: Optional[int] = None,
    tol: Optional[float] = None,
) -> ProjectionOutcome:
    """
    Euclidean projection of ``m`` onto {u : u_0 = 1, B H(u) +- S(u) PSD}.

    That set is the convex hull of the moment curve on [-B, B], so the
    projection is the min-norm point of {gamma(t) - m} and is computed with
    Wolfe's algorithm: the linear step minimizes a polynomial over [-B, B],
    the corrective step re-weights the active curve points. Every iterate is a
    convex combination of curve points, hence a valid moment vector.

    Args:
        m: Moment vector (1, m_1, ..., m_{2K-1}).
        B: Bound on the support.
        max_iters: Cap on the outer iterations; defaults to the settings.
        tol: Relative tolerance on the distance; defaults to the settings.

    Returns:
        ProjectionOutcome with the projected vector. Inputs that already
        meet the feasibility tolerance come back unchanged after zero
        iterations.
    """
    m = as_finite_array(m, "m", ndim=1)
    if m.size < 2 or m.size % 2:
        raise InvalidInputException(
            "moment vector must have even length 2K", parameter="m"
        )
    if abs(m[0] - 1.0) > 1e-12:
        raise InvalidInputException("m[0] must equal 1", parameter="m")
    B = check_positive(B, "B")
    settings = get_settings()
    max_iters = settings.projection_max_sweeps if max_iters is None else int(max_iters)
    tol = settings.projection_tol if tol is None else float(tol)

    min_eig = localizing_min_eigenvalue(m, B)
    if min_eig >= -FEASIBILITY_TOL:
        return ProjectionOutcome(
            moments=m.copy(), iterations=0, min_eigenvalue=min_eig, converged=True
        )

    n = m.size
    target = m[1:]
    oracle = CurveOracle(n, B)
    scale = max(1.0, float(np.linalg.norm(m)))

    nodes = np.array([float(np.clip(m[1], -B, B))])
    weights = np.ones(1)
    points = (moment_curve(nodes, n)[:, 1:] - target).T
    x = points[:, 0].copy()
    converged = False
    iterations = 0

    for iterations in range(1, max_iters + 1):
        distance = float(np.linalg.norm(x))
        if distance <= tol * scale:
            converged = True
            break
        t_new = oracle(x)
        p_new = moment_curve(t_new, n)[0, 1:] - target
        # x'x - min_t <x, gamma(t) - m> bounds |x|^2 - |x*|^2 from above
        gap = float(x @ x - x @ p_new)
        if gap <= tol * scale * distance:
            converged = True
            break
        if np.any(np.abs(nodes - t_new) <= NODE_TOL * B):
            logger.debug(f"moment projection stalled at iteration {iterations}")
            break

        trial = _corrective_step(
            np.append(nodes, t_new),
            np.append(weights, 0.0),
            np.column_stack([points, p_new]),
        )
        x_next = trial[2] @ trial[1]
        if float(np.linalg.norm(x_next)) >= distance:
            logger.debug(f"moment projection stalled at iteration {iterations}")
            break
        nodes, weights, points = trial
        x = x_next

    # the convex combination itself; target + x loses digits when m is large
    u = weights @ moment_curve(nodes, n)
    u[0] = 1.0
    return ProjectionOutcome(
        moments=u,
        iterations=iterations,
        min_eigenvalue=localizing_min_eigenvalue(u, B),
        converged=converged,
    )


def project_to_valid_moments(m, B: float, quiet: bool = False) -> np.ndarray:
    """Closest valid moment vector of a K-atomic measure on [-B, B]."""
    outcome = solve_moment_projection(m, B)
    return _accept_projection(outcome, quiet=quiet)


def _accept_projection(outcome: ProjectionOutcome, quiet: bool = False) -> np.ndarray:
    if outcome.converged:
        return outcome.moments
    if outcome.min_eigenvalue >= -FEASIBILITY_TOL:
        log = logger.debug if quiet else logger.warning
        log(
            f"moment projection stopped after {outcome.iterations} iterations "
            "short of its tolerance at a feasible point "
            f"(min eigenvalue {outcome.min_eigenvalue:.3e})"
        )
        return outcome.moments
    raise ProjectionFailureException(
        "moment projection did not reach a feasible point "
        f"after {outcome.iterations} iterations",
        infeasibility=-outcome.min_eigenvalue,
        iterations=outcome.iterations,
    )


def hankel_root_recovery(m_tilde, K: int, B: Optional[float] = None) -> np.ndarray:
    """
    Axis coordinates of the atoms as roots of x^K + c_{K-1} x^{K-1} + ... + c_0,
    where H c = -(m_K, ..., m_{2K-1}).
    """
    m_tilde = as_finite_array(m_tilde, "m_tilde", ndim=1)
    K = int(K)
    if m_tilde.size != 2 * K:
        raise InvalidInputException(f"expected {2 * K} moments", parameter="m_tilde")

    H = HankelPair.from_moments(m_tilde).H
    cond = float(np.linalg.cond(H))
    if not np.isfinite(cond) or cond > HANKEL_COND_LIMIT:
        raise DegenerateMomentsException(
            f"Hankel moment matrix is numerically singular (cond={cond:.3e})",
            condition_number=cond,
        )
    coefs = linalg.solve(H, -m_tilde[K : 2 * K], assume_a="sym")
    roots = P.polyroots(np.append(coefs, 1.0))
    roots = np.atleast_1d(roots)

    if np.iscomplexobj(roots):
        bad = np.abs(roots.imag) > IMAG_TOL * (1.0 + np.abs(roots.real))
        if np.any(bad):
            raise ComplexRootException(
                f"{int(bad.sum())} of {K} moment-polynomial roots are complex",
                roots=roots,
            )
        roots = roots.real
    roots = np.sort(roots)
    if B is not None:
        roots = np.clip(roots, -B - ROOT_SLACK, B + ROOT_SLACK)
    return roots


def _vandermonde(roots: np.ndarray, K: int) -> np.ndarray:
    # column k = (1, r_k, ..., r_k^{K-1})
    return np.vander(roots, K, increasing=True).T


def recover_coordinates(moments: LatentMoments, roots, B: float) -> np.ndarray:
    """(L-1) x K matrix of atom coordinates along the completing directions."""
    roots = as_finite_array(roots, "roots", ndim=1)
    K = moments.K
    if roots.size != K:
        raise InvalidInputException(f"expected {K} roots", parameter="roots")
    M = HankelPair.from_moments(moments.m).H
    M_pinv = linalg.pinv(M, atol=0.0, rtol=PINV_RTOL)
    coords = moments.mixed @ M_pinv @ _vandermonde(roots, K)
    return np.clip(coords, -B, B)


def simplex_project(y) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    y = as_finite_array(y, "y", ndim=1)
    if y.size == 0:
        raise InvalidInputException("cannot project an empty vector", parameter="y")
    u = np.sort(y)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, y.size + 1)
    rho = ind[u - cssv / ind > 0][-1]
    tau = cssv[rho - 1] / rho
    out = np.maximum(y - tau, 0.0)
    return out / out.sum()


def recover_weights(m_tilde, roots) -> np.ndarray:
    """Weights solving V alpha = (m_0, ..., m_{K-1}), projected onto the simplex."""
    m_tilde = as_finite_array(m_tilde, "m_tilde", ndim=1)
    roots = as_finite_array(roots, "roots", ndim=1)
    K = roots.size
    if m_tilde.size < K:
        raise InvalidInputException(f"need at least {K} moments", parameter="m_tilde")
    raw = linalg.pinv(_vandermonde(roots, K), atol=0.0, rtol=PINV_RTOL) @ m_tilde[:K]
    return simplex_project(raw)


def complete_basis(v) -> AxisFrame:
    """Householder completion of ``v`` to an orthonormal frame (maps e_1 to v)."""
    v = as_finite_array(v, "v", ndim=1)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise InvalidInputException("axis must be nonzero", parameter="v")
    if abs(norm - 1.0) > 1e-8:
        raise InvalidInputException(
            f"axis must be a unit vector (norm {norm!r})", parameter="v"
        )
    v = v / norm
    L = v.size
    w = -v.copy()
    w[0] += 1.0
    w_sq = float(w @ w)
    if np.sqrt(w_sq) < 1e-12:
        R = np.eye(L)
    else:
        R = np.eye(L) - 2.0 * np.outer(w, w) / w_sq
    return AxisFrame(v=v, W=R[:, 1:])


def _assemble(frame: AxisFrame, roots: np.ndarray, coords: np.ndarray) -> np.ndarray:
    # theta_k = root_k v + W coords[:, k]
    return np.outer(roots, frame.v) + (frame.W @ coords).T


def _partial_result(
    frame: AxisFrame, moments: LatentMoments, roots, B: float, Sigma
) -> Optional[MixtureParams]:
    try:
        roots = np.sort(np.clip(np.real(np.asarray(roots)), -B, B))
        coords = recover_coordinates(moments, roots, B)
        alpha = recover_weights(moments.m, roots)
        thetas = _assemble(frame, roots, coords)
        if Sigma is not None:
            thetas = rescale_for_covariance(thetas, Sigma)
        return MixtureParams(alpha=alpha, thetas=thetas)
    except (InvalidInputException, np.linalg.LinAlgError):
        return None


def mom_fit(
    counts: SampleCounts,
    X: FeatureMatrix,
    K: int,
    B: float,
    v,
    moments: Optional[LatentMoments] = None,
    Sigma=None,
    degree_cap: Optional[int] = None,
) -> MomResult:
    """Run the moment pipeline along axis ``v``.

    ``moments`` injects precomputed latent moments (they must be expressed in
    ``complete_basis(v)``); ``Sigma`` rescales the atoms for a N(0, Sigma)
    base measure. Stage errors surface as MomFailureException with the stage
    name; complex roots carry a partial estimate built from their real parts.
    """
    B = check_positive(B, "B")
    frame = complete_basis(v)
    if frame.L != X.L:
        raise InvalidInputException("axis dimension does not match X", parameter="v")

    if moments is None:
        moments = estimate_moments(counts, X, frame, K, B, degree_cap=degree_cap)
    elif moments.K != int(K) or moments.mixed.shape[0] != X.L - 1:
        raise InvalidInputException(
            "injected moments do not match K and L", parameter="moments"
        )
    log_fit_progress("MoM", "moments", K=K, m1=f"{moments.m[1]:.6g}")

    try:
        outcome = solve_moment_projection(moments.m, B)
        m_tilde = _accept_projection(outcome)
    except ProjectionFailureException as exc:
        raise MomFailureException(exc.message, stage="projection") from exc
    projected = moments.with_axis_moments(m_tilde)
    log_fit_progress(
        "MoM",
        "projection",
        iters=outcome.iterations,
        min_eig=f"{outcome.min_eigenvalue:.3e}",
    )

    try:
        roots = hankel_root_recovery(m_tilde, K, B)
    except ComplexRootException as exc:
        partial = _partial_result(frame, projected, exc.roots, B, Sigma)
        raise MomFailureException(
            exc.message, stage="roots", partial_result=partial
        ) from exc
    except (DegenerateMomentsException, np.linalg.LinAlgError) as exc:
        raise MomFailureException(str(exc), stage="roots") from exc
    roots = np.clip(roots, -B, B)
    log_fit_progress("MoM", "roots", roots=np.array2string(roots, precision=4))

    coords = recover_coordinates(projected, roots, B)
    alpha = recover_weights(m_tilde, roots)
    thetas = _assemble(frame, roots, coords)
    if Sigma is not None:
        thetas = rescale_for_covariance(thetas, Sigma)

    diagnostics = MomDiagnostics(
        projection_iters=outcome.iterations,
        min_hankel_eig=float(linalg.eigvalsh(HankelPair.from_moments(m_tilde).H)[0]),
        vandermonde_cond=float(np.linalg.cond(_vandermonde(roots, K))),
    )
    log_fit_progress(
        "MoM", "done", vandermonde_cond=f"{diagnostics.vandermonde_cond:.3e}"
    )
    return MomResult(
        omega_hat=MixtureParams(alpha=alpha, thetas=thetas),
        roots=roots,
        projected_moments=projected,
        diagnostics=diagnostics,
        frame=frame,
    )

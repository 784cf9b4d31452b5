"""Ellipticity constants and nearness estimators for first-order operators.

The ellipticity constant of a constant tensor is

    nu(A) = min over unit eta, unit a of |A : eta (x) a|
          = min over unit a of sigma_min(A a),

the worst-direction smallest singular value of the direction matrix.  For
a nonlinear operator F(x, P) anchored at A, the companion quantity is the
nearness constant

    nu(F, A) = ess sup over x, P, Q != 0 of |F(x, P+Q) - F(x, P) - A:Q| / |Q|,

and strict ellipticity of F relative to A means nu(F, A) < nu(A).  Both
are estimated here: nu(A) by quasi-uniform sphere sampling plus
derivative-free refinement, nu(F, A) by sampled difference quotients over
an (x, P, Q) plan.  Sampled sup estimates are lower bounds of the true
sup; sampled min estimates are upper bounds of the true min.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize

from .sampling import SamplingPlan, unit_sphere_points
from .tensor import ConstantTensor, contract, direction_matrix, determinant, operator_norm

__all__ = [
    "NonEllipticError",
    "EllipticityReport",
    "NearnessReport",
    "PseudoMonotonicityReport",
    "LipschitzConverseReport",
    "ellipticity_constant",
    "det_condition",
    "cached_nu",
    "nearness_constant",
    "is_strictly_elliptic",
    "check_pseudomonotonicity",
    "lipschitz_and_converse",
]


class NonEllipticError(ValueError):
    """Raised when an operation requires nu > 0 but the tensor fails it."""


@dataclass(frozen=True)
class EllipticityReport:
    """Result of an ellipticity-constant computation."""

    nu: float
    argmin_direction: np.ndarray
    min_abs_det: float
    resolution: int
    refined: bool
    elliptic: bool


@dataclass(frozen=True)
class NearnessReport:
    """Sampled estimate of nu(F, A) and the derived nearness ratio.

    ``nu_fa`` is a max over finitely many difference quotients, hence a
    lower bound for the true essential sup; x samples cover the labelled
    fundamental cell only.
    """

    nu_fa: float
    nu_a: float
    ratio: float
    samples_used: int
    worst_x: np.ndarray
    worst_p: np.ndarray
    worst_q: np.ndarray
    x_cell: str
    declared_nearness: float | None = None

    def witness_ratio(self, F) -> float:
        """Re-evaluate the stored worst witness; reproduces ``nu_fa``."""
        return _difference_quotient(F, self.worst_x, self.worst_p, self.worst_q)


@dataclass(frozen=True)
class PseudoMonotonicityReport:
    """Sampled check of the one-sided quadratic monotonicity inequality

    (A:Q) . (F(x, P+Q) - F(x, P)) >= |A:Q|^2 / 2 - (lam^2 / 2) nu(A)^2 |Q|^2.
    """

    lam: float
    violations: int
    worst_violation: float
    samples_used: int
    witness_x: np.ndarray | None
    witness_p: np.ndarray | None
    witness_q: np.ndarray | None


@dataclass(frozen=True)
class LipschitzConverseReport:
    """Sampled Lipschitz estimate with the converse ellipticity test.

    If the pseudo-monotonicity inequality holds at level ``lam`` and the
    Lipschitz constant of F(x, .) is below sqrt(1 - lam^2) nu(A), then F
    is strictly elliptic relative to A.  ``concluded_elliptic`` records
    whether both sampled hypotheses held.
    """

    lipschitz_estimate: float
    threshold: float
    lam: float
    pseudo_monotone_violations: int
    lipschitz_below_threshold: bool
    concluded_elliptic: bool
    samples_used: int


def _sigma_min(A: ConstantTensor, dirs: np.ndarray) -> np.ndarray:
    """Smallest singular value of A a for stacked directions."""
    return np.linalg.svd(direction_matrix(A, dirs), compute_uv=False)[..., -1]


def _refine_on_sphere(objective, a0: np.ndarray, simplex_scale: float = 1e-2):
    """Derivative-free local descent of a sphere function from a0.

    The sphere is charted as t -> normalize(a0 + T t) with T a tangent
    basis; Nelder-Mead runs until the simplex diameter drops below 1e-10.
    Returns (value, point, converged); the value never exceeds
    objective(a0).
    """
    a0 = a0 / np.linalg.norm(a0)
    T = null_space(a0[None, :])  # (n, n-1)

    def chart(t):
        v = a0 + T @ t
        return v / np.linalg.norm(v)

    dim = T.shape[1]
    init = np.zeros((dim + 1, dim))
    init[1:] += simplex_scale * np.eye(dim)
    res = minimize(
        lambda t: objective(chart(t)),
        np.zeros(dim),
        method="Nelder-Mead",
        options={
            "xatol": 1e-10,
            "fatol": 1e-14,
            "maxiter": 4000,
            "maxfev": 8000,
            "initial_simplex": init,
        },
    )
    f0 = objective(a0)
    if res.fun <= f0:
        return float(res.fun), chart(res.x), bool(res.success)
    return float(f0), a0, bool(res.success)


def ellipticity_constant(A: ConstantTensor, resolution: int = 2048) -> EllipticityReport:
    """Compute nu(A) by sphere sampling plus local refinement.

    Parameters
    ----------
    A : ConstantTensor
    resolution : int
        Number of quasi-uniform sphere samples, at least 100.

    Returns
    -------
    EllipticityReport
        With ``nu``, the unit ``argmin_direction``, the refined minimum
        of |det(A a)|, the sample count, and flags for refinement
        convergence and ellipticity.
    """
    if resolution < 100:
        raise ValueError(f"resolution must be >= 100, got {resolution}")
    dirs = unit_sphere_points(A.n, resolution)
    sigmas = _sigma_min(A, dirs)
    best = int(np.argmin(sigmas))  # ties: first sample wins

    def objective(a):
        return float(np.linalg.svd(direction_matrix(A, a), compute_uv=False)[-1])

    nu, argmin, converged = _refine_on_sphere(objective, dirs[best])
    nu = min(nu, float(sigmas[best]))

    dets = np.abs(determinant(direction_matrix(A, dirs)))
    best_det = int(np.argmin(dets))
    min_det, _, _ = _refine_on_sphere(
        lambda a: float(abs(determinant(direction_matrix(A, a)))), dirs[best_det]
    )
    min_det = min(min_det, float(dets[best_det]))

    scale = max(1.0, operator_norm(A))
    return EllipticityReport(
        nu=float(nu),
        argmin_direction=argmin / np.linalg.norm(argmin),
        min_abs_det=float(min_det),
        resolution=resolution,
        refined=converged,
        elliptic=bool(nu > 1e-12 * scale),
    )


def det_condition(A: ConstantTensor, resolution: int = 2048) -> float:
    """Minimum of |det(A a)| over unit directions; positive iff elliptic."""
    return ellipticity_constant(A, resolution).min_abs_det


_NU_CACHE: dict = {}


def cached_nu(A: ConstantTensor, resolution: int = 4096) -> float:
    """nu(A) memoized on the tensor entries; shared by the solvers."""
    key = (A.entries.shape, A.entries.tobytes(), resolution)
    if key not in _NU_CACHE:
        _NU_CACHE[key] = ellipticity_constant(A, resolution).nu
    return _NU_CACHE[key]


def _difference_quotient(F, x, P, Q) -> float:
    """|F(x, P+Q) - F(x, P) - A:Q| / |Q| for a single witness triple."""
    A = F.anchor
    x = np.asarray(x, dtype=float)
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    dF = F.evaluate(x, P + Q) - F.evaluate(x, P)
    qnorm = np.linalg.norm(Q)
    return float(np.linalg.norm(dF - contract(A, Q)) / qnorm)


def _increment_sweep(F, plan: SamplingPlan):
    """Yield per-(direction, scale) batches of difference data.

    Each item is ``(s, U, X, P, F0, F1)`` with X of shape (nx, 1, n),
    P of shape (1, np, N, n), F0 = F(X, P) and F1 = F(X, P + s U),
    both broadcast to shape (nx, np, N).
    """
    A = F.anchor
    N, n = A.N, A.n
    X = plan.x_points(n)[:, None, :]  # (nx, 1, n)
    P = plan.p_matrices(N, n)[None, :, :, :]  # (1, np, N, n)
    dirs = plan.q_directions(N, n, anchor=A)
    nx, npts = X.shape[0], P.shape[1]
    F0 = np.broadcast_to(F.evaluate(X, P), (nx, npts, N))
    for U in dirs:
        for s in plan.q_scales:
            F1 = np.broadcast_to(F.evaluate(X, P + s * U), (nx, npts, N))
            yield s, U, X, P, F0, F1


def nearness_constant(F, A: ConstantTensor | None = None, plan: SamplingPlan | None = None) -> NearnessReport:
    """Sampled estimate of nu(F, A) and the ratio nu(F, A) / nu(A).

    The estimate is the max of |F(x, P+Q) - F(x, P) - A:Q| / |Q| over the
    plan's triples, hence a lower bound for the true sup; it is monotone
    under enrichment of the plan's random streams.
    """
    A = F.anchor if A is None else A
    plan = plan or SamplingPlan()
    nu_a = cached_nu(A)
    best = -1.0
    witness = None
    total = 0
    for s, U, X, P, F0, F1 in _increment_sweep(F, plan):
        AQ = s * contract(A, U)
        ratios = np.linalg.norm(F1 - F0 - AQ, axis=-1) / s
        total += ratios.size
        i, j = np.unravel_index(np.argmax(ratios), ratios.shape)
        if ratios[i, j] > best:
            best = float(ratios[i, j])
            witness = (X[i, 0], P[0, j], s * U)
    wx, wp, wq = witness
    return NearnessReport(
        nu_fa=best,
        nu_a=nu_a,
        ratio=best / nu_a if nu_a > 0 else np.inf,
        samples_used=total,
        worst_x=wx.copy(),
        worst_p=wp.copy(),
        worst_q=wq.copy(),
        x_cell=f"[0, {plan.x_box})^{A.n}",
        declared_nearness=getattr(F, "declared_nearness", None),
    )


def is_strictly_elliptic(F, A: ConstantTensor | None = None, plan: SamplingPlan | None = None):
    """Sampled test of nu(F, A) < nu(A); returns (bool, margin).

    The margin is nu(A) minus the sampled nearness estimate.  Since the
    estimate is a lower bound of the true sup, a True answer is a
    necessary-condition certificate only; False is conclusive.
    """
    rep = nearness_constant(F, A, plan)
    margin = rep.nu_a - rep.nu_fa
    return bool(margin > 0), float(margin)


def check_pseudomonotonicity(
    F, A: ConstantTensor | None = None, lam: float = 0.5, plan: SamplingPlan | None = None
) -> PseudoMonotonicityReport:
    """Sampled check of the quadratic monotonicity inequality at level lam.

    Whenever the sampled nearness quotients stay below lam * nu(A), the
    inequality holds on those same samples, so a zero violation count is
    the expected outcome for genuinely near operators.  Violations are
    counted with a small floating-point guard band and reported with the
    worst witness.
    """
    A = F.anchor if A is None else A
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lam must be in (0, 1), got {lam}")
    plan = plan or SamplingPlan()
    nu_a = cached_nu(A)
    violations = 0
    worst = 0.0
    witness = (None, None, None)
    total = 0
    for s, U, X, P, F0, F1 in _increment_sweep(F, plan):
        AQ = s * contract(A, U)  # (N,)
        lhs = np.einsum("...a,a->...", F1 - F0, AQ)
        aq_sq = float(AQ @ AQ)
        rhs = 0.5 * aq_sq - 0.5 * lam**2 * nu_a**2 * s**2
        guard = 1e-12 * (aq_sq + nu_a**2 * s**2)
        gap = rhs - lhs  # positive where violated
        total += gap.size
        bad = gap > guard
        violations += int(np.count_nonzero(bad))
        i, j = np.unravel_index(np.argmax(gap), gap.shape)
        if gap[i, j] > worst:
            worst = float(gap[i, j])
            witness = (X[i, 0].copy(), P[0, j].copy(), s * U)
    return PseudoMonotonicityReport(
        lam=lam,
        violations=violations,
        worst_violation=worst if worst > 0 else 0.0,
        samples_used=total,
        witness_x=witness[0],
        witness_p=witness[1],
        witness_q=witness[2],
    )


def lipschitz_and_converse(
    F, A: ConstantTensor | None = None, lam: float = 0.5, plan: SamplingPlan | None = None
) -> LipschitzConverseReport:
    """Sampled Lipschitz constant of F(x, .) and the converse test.

    Estimates sup |F(x, P+Q) - F(x, P)| / |Q| over the plan, compares it
    with the threshold sqrt(1 - lam^2) nu(A), and runs the
    pseudo-monotonicity check at the same level; strict ellipticity is
    concluded only when both sampled hypotheses hold.
    """
    A = F.anchor if A is None else A
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lam must be in (0, 1), got {lam}")
    plan = plan or SamplingPlan()
    nu_a = cached_nu(A)
    lip = 0.0
    total = 0
    for s, U, X, P, F0, F1 in _increment_sweep(F, plan):
        quotients = np.linalg.norm(F1 - F0, axis=-1) / s
        total += quotients.size
        lip = max(lip, float(quotients.max()))
    threshold = float(np.sqrt(1.0 - lam**2) * nu_a)
    pm = check_pseudomonotonicity(F, A, lam, plan)
    below = lip < threshold
    return LipschitzConverseReport(
        lipschitz_estimate=lip,
        threshold=threshold,
        lam=lam,
        pseudo_monotone_violations=pm.violations,
        lipschitz_below_threshold=below,
        concluded_elliptic=bool(below and pm.violations == 0),
        samples_used=total,
    )

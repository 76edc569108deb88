"""Zero-order Tikhonov regularization of the discretized first-kind equation.

The regularized solution solves ``(alpha E + A^T A) z = A^T u``.  The
regularization parameter is picked by the discrepancy principle, i.e. the
``alpha`` at which ``||A z_alpha - u||_2`` equals the data-error norm
``delta``.  The residual is nondecreasing in ``alpha``, so a log-spaced scan
followed by bisection in ``log alpha`` finds the root.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import BracketError, DataError, DimensionError, NumericalError
from .spectrum import SampledSpectrum

__all__ = [
    "RegularizedSolution",
    "ErrorBudget",
    "solve_tikhonov",
    "residual_norm",
    "spectral_norm",
    "choose_alpha_discrepancy",
    "discrepancy_curve",
    "error_bound",
    "error_estimate",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ErrorBudget:
    """Data-error inputs of the solution error bound.

    delta : norm of the source error ``||u~ - u||_2``
    xi : norm of the kernel error
    p : tuning parameter of the bias term
    """

    delta: float = 0.0
    xi: float = 0.0
    p: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.delta) and np.isfinite(self.xi) and np.isfinite(self.p)):
            raise DataError("error budget entries must be finite")
        if self.delta < 0 or self.xi < 0 or not self.p > 0:
            raise DataError("need delta >= 0, xi >= 0, p > 0")


@dataclass(frozen=True, eq=False)
class RegularizedSolution:
    z_alpha: SampledSpectrum
    alpha: float
    residual: float
    op_norm: float
    data_norm: float
    epsilon_alpha: float = float("nan")

    @property
    def norm(self):
        return float(np.linalg.norm(self.z_alpha.values))


def _matrix(A):
    return np.asarray(getattr(A, "values", A), dtype=float)


def _vector(u):
    return np.asarray(getattr(u, "values", u), dtype=float)


def residual_norm(A, z, u):
    """Unnormalized Euclidean norm of ``A z - u``."""
    a, zv, uv = _matrix(A), _vector(z), _vector(u)
    if a.shape != (uv.size, zv.size):
        raise DimensionError(f"operator {a.shape} incompatible with z[{zv.size}], u[{uv.size}]")
    return float(np.linalg.norm(a @ zv - uv))


def spectral_norm(A, tol=1e-6, max_iter=30, seed=0):
    """Estimate ``||A||_2`` by power iteration on ``A^T A``.

    Stops once the Rayleigh-quotient estimate changes by less than ``tol``
    relative, or after ``max_iter`` iterations.  The iteration starts from
    ``A^T 1``, which overlaps the leading singular vector of a nonnegative
    kernel matrix well; a seeded random vector is used when that is zero.
    The estimate never exceeds the true norm.
    """
    a = _matrix(A)
    if a.size == 0 or not np.any(a):
        return 0.0
    x = a.T @ np.ones(a.shape[0])
    if not np.any(x):
        x = np.random.default_rng(seed).standard_normal(a.shape[1])
    x /= np.linalg.norm(x)
    estimate = 0.0
    for it in range(max_iter):
        ax = a @ x
        new = float(np.linalg.norm(ax))
        y = a.T @ ax
        ny = np.linalg.norm(y)
        if ny == 0:
            return new
        x = y / ny
        if it and abs(new - estimate) <= tol * new:
            estimate = new
            break
        estimate = new
    return float(np.linalg.norm(a @ x))


def solve_tikhonov(A, u, alpha, budget=None, op_norm=None):
    """Solve ``(alpha E + A^T A) z = A^T u`` by Cholesky factorization.

    Parameters
    ----------
    A : KernelMatrix or ndarray, shape (m, N)
    u : SampledSpectrum or ndarray, length m
    alpha : float
        Regularization parameter, must be positive.
    budget : ErrorBudget, optional
        When given, ``epsilon_alpha`` of the result is filled in.
    op_norm : float, optional
        Precomputed ``||A||_2``; estimated by power iteration otherwise.

    Returns
    -------
    RegularizedSolution
    """
    a, uv = _matrix(A), _vector(u)
    if a.shape[0] != uv.size:
        raise DimensionError(f"data length {uv.size} does not match {a.shape[0]} operator rows")
    if not (np.isfinite(alpha) and alpha > 0):
        raise DataError(f"alpha must be positive, got {alpha}")
    normal = a.T @ a
    normal[np.diag_indices_from(normal)] += alpha
    try:
        factor = scipy.linalg.cho_factor(normal, lower=False, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Cholesky factorization failed at alpha={alpha}: {exc}") from exc
    z = scipy.linalg.cho_solve(factor, a.T @ uv)
    col_grid = getattr(A, "col_grid", None)
    if col_grid is None:
        from .grid import Grid

        col_grid = Grid(0.0, float(max(a.shape[1] - 1, 1)), max(a.shape[1], 2))
    sol = RegularizedSolution(
        z_alpha=SampledSpectrum(col_grid, z),
        alpha=float(alpha),
        residual=float(np.linalg.norm(a @ z - uv)),
        op_norm=spectral_norm(a) if op_norm is None else float(op_norm),
        data_norm=float(np.linalg.norm(uv)),
    )
    if budget is not None:
        sol = replace(sol, epsilon_alpha=error_estimate(sol, budget))
    return sol


def discrepancy_curve(A, u):
    """Return ``residual(alpha)`` evaluated through a thin SVD of ``A``.

    With ``A = U S V^T`` and ``c = U^T u`` the Tikhonov residual is
    ``sum (c_i / (1 + s_i**2 / alpha))**2 + ||u - U c||**2``.  Every step is
    a monotone floating-point operation in ``alpha``, so the computed curve is
    nondecreasing exactly, not just up to rounding.
    """
    a, uv = _matrix(A), _vector(u)
    if a.shape[0] != uv.size:
        raise DimensionError(f"data length {uv.size} does not match {a.shape[0]} operator rows")
    U, s, _ = np.linalg.svd(a, full_matrices=False)
    c = U.T @ uv
    perp = float(np.sum((uv - U @ c) ** 2))
    s2 = s * s

    def residual(alpha):
        f = c / (1.0 + s2 / alpha)
        return float(np.sqrt(np.sum(f * f) + perp))

    return residual


def choose_alpha_discrepancy(
    A, u, delta, alpha_lo=1e-8, alpha_hi=1e2, points_per_decade=25, rtol=1e-3, max_iter=200
):
    """Discrepancy-principle choice of ``alpha``.

    Returns
    -------
    alpha_d : float
        ``|residual(alpha_d) - delta| <= rtol * delta``.
    trace : list of (alpha, residual)
        The log-spaced scan, ascending in ``alpha``.
    """
    if not (alpha_lo > 0 and alpha_hi > alpha_lo):
        raise DataError(f"need 0 < alpha_lo < alpha_hi, got [{alpha_lo}, {alpha_hi}]")
    if not delta > 0:
        raise DataError(f"delta must be positive, got {delta}")
    residual = discrepancy_curve(A, u)
    lg_lo, lg_hi = np.log10(alpha_lo), np.log10(alpha_hi)
    n = max(int(np.ceil((lg_hi - lg_lo) * points_per_decade)), 1) + 1
    exps = np.linspace(lg_lo, lg_hi, n)
    trace = [(float(10.0 ** e), residual(10.0 ** e)) for e in exps]
    r_lo, r_hi = trace[0][1], trace[-1][1]
    if not (r_lo < delta < r_hi):
        raise BracketError(
            f"discrepancy target delta={delta:.6g} not bracketed: residual({alpha_lo:.3g})="
            f"{r_lo:.6g}, residual({alpha_hi:.3g})={r_hi:.6g}; widen the alpha range or revise delta",
            alpha_lo, r_lo, alpha_hi, r_hi, delta,
        )
    k = next(i for i, (_, r) in enumerate(trace) if r >= delta)
    if abs(trace[k][1] - delta) <= rtol * delta:
        return trace[k][0], trace
    lo, hi = exps[k - 1], exps[k]
    best = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        r = residual(10.0 ** mid)
        best = float(10.0 ** mid)
        if abs(r - delta) <= rtol * delta:
            break
        if r < delta:
            lo = mid
        else:
            hi = mid
    else:
        log.warning("discrepancy bisection hit the iteration cap at alpha=%g", best)
    return best, trace


def error_bound(op_norm, alpha, eta, p, z_norm):
    """``(||A|| / (2 sqrt(alpha)) * eta + p alpha / (p alpha + 1)) * ||z_alpha||``."""
    if z_norm == 0:
        return 0.0
    return float((op_norm / (2.0 * np.sqrt(alpha)) * eta + p * alpha / (p * alpha + 1.0)) * z_norm)


def error_estimate(sol, budget):
    """Norm bound on the error of a regularized solution.

    The relative data error is ``delta / ||u~|| + xi / ||A||``; the noisy data
    norm stands in for the unknown exact one.
    """
    z_norm = sol.norm
    if z_norm == 0:
        return 0.0
    eta = 0.0
    if budget.delta:
        eta += budget.delta / sol.data_norm
    if budget.xi:
        eta += budget.xi / sol.op_norm
    return error_bound(sol.op_norm, sol.alpha, eta, budget.p, z_norm)

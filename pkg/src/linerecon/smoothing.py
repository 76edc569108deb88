"""Noise-level estimation and natural cubic smoothing splines.

The spline minimizes ``sum (y_i - g(x_i))**2 + lam * int g''(x)**2 dx``
(Reinsch).  With ``Q`` the second-difference matrix and ``R`` the tridiagonal
Gram matrix of the hat functions, the interior second derivatives ``gamma``
solve ``(R + lam Q^T Q) gamma = Q^T y`` and the knot values are
``g = y - lam Q gamma``.  The residual ``||y - g|| = lam ||Q gamma||`` grows
monotonically with ``lam``; we bisect on ``log lam`` to hit a target residual.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .errors import DataError, DomainError, InsufficientDataError
from .spectrum import SampledSpectrum

__all__ = [
    "SmoothingSpline",
    "estimate_noise_sd",
    "fit_smoothing_spline",
    "spline_with_weight",
    "resample",
]

_MAD_TO_SD = 0.6744897501960817


def estimate_noise_sd(noisy):
    """Robust per-sample noise SD from second differences.

    For i.i.d. noise of SD ``s`` the second difference has SD ``sqrt(6) s``,
    and the median absolute value of a centred normal is 0.6745 of its SD.
    """
    y = np.asarray(getattr(noisy, "values", noisy), dtype=float)
    if y.size < 3:
        raise InsufficientDataError("noise estimate needs at least 3 samples")
    d2 = np.diff(y, 2)
    return float(np.median(np.abs(d2)) / (np.sqrt(6.0) * _MAD_TO_SD))


@dataclass(frozen=True, eq=False)
class SmoothingSpline:
    """Natural cubic spline through knot values ``fitted`` with second derivatives ``second``.

    On interval ``i`` the spline is ``c0 + c1 t + c2 t**2 + c3 t**3`` with
    ``t = x - knots[i]`` and ``coefficients[i] = (c0, c1, c2, c3)``.
    """

    knots: np.ndarray
    fitted: np.ndarray
    second: np.ndarray
    lam: float
    smoothing_residual: float
    saturated: bool = False

    @property
    def coefficients(self):
        x, g, gam = self.knots, self.fitted, self.second
        h = np.diff(x)
        c1 = np.diff(g) / h - h * (2.0 * gam[:-1] + gam[1:]) / 6.0
        c3 = np.diff(gam) / (6.0 * h)
        return np.column_stack([g[:-1], c1, 0.5 * gam[:-1], c3])

    def __call__(self, x, derivative=0):
        x = np.asarray(x, dtype=float)
        lo, hi = self.knots[0], self.knots[-1]
        slack = 1e-12 * (hi - lo)
        if np.any((x < lo - slack) | (x > hi + slack)):
            raise DomainError(f"spline evaluation outside knot span [{lo}, {hi}]")
        idx = np.clip(np.searchsorted(self.knots, x, side="right") - 1, 0, len(self.knots) - 2)
        t = x - self.knots[idx]
        c0, c1, c2, c3 = self.coefficients[idx].T
        if derivative == 0:
            return c0 + t * (c1 + t * (c2 + t * c3))
        if derivative == 1:
            return c1 + t * (2.0 * c2 + 3.0 * t * c3)
        if derivative == 2:
            return 2.0 * c2 + 6.0 * t * c3
        raise ValueError("derivative must be 0, 1 or 2")


class _Reinsch:
    """Precomputed band matrices for one set of knots."""

    def __init__(self, x):
        h = np.diff(x)
        n = x.size
        self.h = h
        # Q: n x (n-2), column j couples knots j, j+1, j+2
        self.q_lo = 1.0 / h[:-1]
        self.q_mid = -1.0 / h[:-1] - 1.0 / h[1:]
        self.q_hi = 1.0 / h[1:]
        self.r_diag = (h[:-1] + h[1:]) / 3.0
        self.r_off = h[1:-1] / 6.0
        # Q^T Q is pentadiagonal
        k = n - 2
        self.qtq = np.zeros((3, k))
        self.qtq[2] = self.q_lo ** 2 + self.q_mid ** 2 + self.q_hi ** 2
        self.qtq[1, 1:] = self.q_mid[:-1] * self.q_lo[1:] + self.q_hi[:-1] * self.q_mid[1:]
        self.qtq[0, 2:] = self.q_hi[:-2] * self.q_lo[2:]

    def qt(self, y):
        return self.q_lo * y[:-2] + self.q_mid * y[1:-1] + self.q_hi * y[2:]

    def q(self, gamma):
        out = np.zeros(gamma.size + 2)
        out[:-2] += self.q_lo * gamma
        out[1:-1] += self.q_mid * gamma
        out[2:] += self.q_hi * gamma
        return out

    def solve(self, y, lam):
        ab = lam * self.qtq
        ab[2] += self.r_diag
        ab[1, 1:] += self.r_off
        gamma = solveh_banded(ab, self.qt(y))
        g = y - lam * self.q(gamma)
        return g, gamma


def spline_with_weight(noisy, lam):
    """Smoothing spline for a fixed curvature weight ``lam >= 0``."""
    if not lam >= 0:
        raise DataError(f"smoothing weight must be nonnegative, got {lam}")
    x = np.asarray(noisy.x, dtype=float)
    y = np.asarray(noisy.values, dtype=float)
    if x.size < 4:
        raise InsufficientDataError("smoothing spline needs at least 4 samples")
    g, gamma = _Reinsch(x).solve(y, lam)
    second = np.concatenate([[0.0], gamma, [0.0]])
    return SmoothingSpline(x.copy(), g, second, float(lam), float(np.linalg.norm(g - y)))


def _straight_line(x, y):
    coef = np.polyfit(x, y, 1)
    return np.polyval(coef, x)


def fit_smoothing_spline(noisy, target_residual, rtol=1e-3, max_iter=200):
    """Natural cubic smoothing spline whose residual matches ``target_residual``.

    Parameters
    ----------
    noisy : SampledSpectrum
    target_residual : float
        Desired ``||spline(x_i) - y_i||_2``.  Zero gives the interpolant.
    rtol : float
        Relative tolerance on the achieved residual.

    Returns
    -------
    SmoothingSpline
        ``saturated`` is set when the target exceeds the straight-line
        residual; the straight least-squares line is returned then.
    """
    if not target_residual >= 0:
        raise DataError(f"target residual must be nonnegative, got {target_residual}")
    x = np.asarray(noisy.x, dtype=float)
    y = np.asarray(noisy.values, dtype=float)
    if x.size < 4:
        raise InsufficientDataError("smoothing spline needs at least 4 samples")
    system = _Reinsch(x)

    def fit(lam):
        g, gamma = system.solve(y, lam)
        return g, gamma, float(np.linalg.norm(g - y))

    def spline(g, gamma, lam, res, saturated=False):
        second = np.concatenate([[0.0], gamma, [0.0]])
        return SmoothingSpline(x.copy(), g, second, lam, res, saturated)

    if target_residual == 0:
        g, gamma, res = fit(0.0)
        return spline(y.copy(), gamma, 0.0, res)

    line = _straight_line(x, y)
    line_res = float(np.linalg.norm(line - y))
    if target_residual >= line_res:
        return spline(line, np.zeros(x.size - 2), np.inf, line_res, saturated=True)

    # residual depends on lam only through lam / h**3
    scale = float(np.mean(system.h)) ** 3
    lo, hi = scale, scale
    while fit(lo)[2] > target_residual:
        lo /= 10.0
        if lo < scale * 1e-30:
            g, gamma, res = fit(0.0)
            return spline(y.copy(), gamma, 0.0, res)
    while fit(hi)[2] < target_residual:
        hi *= 10.0
        if hi > scale * 1e30:
            return spline(line, np.zeros(x.size - 2), np.inf, line_res, saturated=True)

    best = None
    for _ in range(max_iter):
        mid = np.sqrt(lo * hi)
        g, gamma, res = fit(mid)
        best = (g, gamma, mid, res)
        if abs(res - target_residual) <= rtol * target_residual:
            break
        if res < target_residual:
            lo = mid
        else:
            hi = mid
    g, gamma, lam, res = best
    return spline(g, gamma, lam, res)


def resample(spline, fine):
    """Evaluate ``spline`` on every node of the grid ``fine``."""
    if fine.start < spline.knots[0] or fine.end > spline.knots[-1]:
        lo, hi = spline.knots[0], spline.knots[-1]
        slack = 1e-12 * (hi - lo)
        if fine.start < lo - slack or fine.end > hi + slack:
            raise DomainError(
                f"resampling grid [{fine.start}, {fine.end}] extrapolates beyond [{lo}, {hi}]"
            )
    return SampledSpectrum(fine, spline(fine.nodes))

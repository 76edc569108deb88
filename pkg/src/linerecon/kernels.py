"""Instrument functions (line-spread functions) and the discretized kernel matrix.

An instrument function ``K(nu, nu')`` is the response of the spectrometer,
tuned to ``nu``, to a unit line at ``nu'``.  Families 1-6 are parametrized by
the half-width at half power ``tau(nu)``; the half-width may vary with the
tuning coordinate, so in general ``K`` is not a convolution kernel.

All evaluators broadcast over numpy arrays.
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionError, DomainError, DataError
from .grid import Grid

__all__ = [
    "Family",
    "HalfWidthMode",
    "HalfWidthLaw",
    "InstrumentFunction",
    "KernelMatrix",
    "halfwidth",
    "eval_if",
    "evaluate",
    "build_matrix",
    "dispersion_if",
]

LN2 = np.log(2.0)
GAUSS_SIGMA_PER_TAU = 1.0 / np.sqrt(2.0 * LN2)
# sinc^2(x) = 1/2 at x = SINC2_HALF_POWER / 2; rounded to 0.8859 in the literature
SINC2_HALF_POWER = 2.0 * brentq(lambda x: np.sinc(x) ** 2 - 0.5, 0.3, 0.6, xtol=1e-15)

VOIGT_WINDOW = 40.0
VOIGT_ATOL = 1e-8
_VOIGT_START = 256
_VOIGT_MAX = 1 << 17


class Family(str, enum.Enum):
    SLOT = "slot"
    TRIANGULAR = "triangular"
    RAYLEIGH = "rayleigh"
    GAUSSIAN = "gaussian"
    LORENTZ = "lorentz"
    EXPONENTIAL = "exponential"
    VOIGT = "voigt"
    MODEL_GAUSSIAN = "model_gaussian"


class HalfWidthMode(str, enum.Enum):
    FREQUENCY_INVERSE = "freq_inverse"
    WAVELENGTH_PROPORTIONAL = "wavelength_prop"
    CONSTANT = "constant"


@dataclass(frozen=True)
class HalfWidthLaw:
    """Half-width at half power as a function of the tuning coordinate.

    ``freq_inverse``: ``tau = q / nu``; ``wavelength_prop``: ``tau = q * lambda``;
    ``constant``: ``tau = q``.
    """

    mode: HalfWidthMode
    q: float

    def __post_init__(self):
        object.__setattr__(self, "mode", HalfWidthMode(self.mode))
        if not (np.isfinite(self.q) and self.q > 0):
            raise DataError(f"half-width coefficient q must be positive, got {self.q}")
        object.__setattr__(self, "q", float(self.q))

    def __call__(self, x):
        return halfwidth(self, x)

    def to_dict(self):
        return {"mode": self.mode.value, "q": self.q}

    @classmethod
    def from_dict(cls, d):
        return cls(HalfWidthMode(d["mode"]), d["q"])


def halfwidth(law, x):
    """Evaluate ``tau`` at ``x`` (scalar or array)."""
    if law.mode is HalfWidthMode.CONSTANT:
        if np.ndim(x) == 0:
            return law.q
        return np.full(np.shape(x), law.q)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError(
            f"{law.mode.value} half-width law needs a positive coordinate, "
            f"got {x[~(x > 0)].ravel()[0] if x.ndim else float(x)}"
        )
    tau = law.q / x if law.mode is HalfWidthMode.FREQUENCY_INVERSE else law.q * x
    return float(tau) if tau.ndim == 0 else tau


@dataclass(frozen=True)
class InstrumentFunction:
    """One instrument-function family with its half-width law.

    Parameters
    ----------
    family : Family
    halfwidth : HalfWidthLaw or None
        Required for every family except ``model_gaussian``.
    g : float
        Overall gain; the kernel integrates to ``g`` over ``nu'``.
    sigma0 : float or None
        ``model_gaussian`` only: ``sigma(nu) = sigma0 * sqrt(1 - 0.16 nu)``.
    voigt_mix : float
        ``voigt`` only: share of ``tau`` assigned to the Gaussian component,
        the rest goes to the Lorentzian.  1 is pure Gaussian, 0 pure Lorentz.
    """

    family: Family
    halfwidth: HalfWidthLaw = None
    g: float = 1.0
    sigma0: float = None
    voigt_mix: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (np.isfinite(self.g) and self.g > 0):
            raise DataError(f"normalizing factor g must be positive, got {self.g}")
        if self.family is Family.MODEL_GAUSSIAN:
            if self.sigma0 is None or not self.sigma0 > 0:
                raise DataError("model_gaussian needs a positive sigma0")
        elif self.halfwidth is None:
            raise DataError(f"{self.family.value} needs a half-width law")
        if not 0.0 <= self.voigt_mix <= 1.0:
            raise DataError(f"voigt_mix must lie in [0, 1], got {self.voigt_mix}")

    def __call__(self, nu, nu_prime):
        return evaluate(self, nu, nu_prime)

    def tau(self, nu):
        """Half-width used for the row ``nu``; for ``model_gaussian`` the HWHM of sigma(nu)."""
        if self.family is Family.MODEL_GAUSSIAN:
            return _model_sigma(self.sigma0, nu) / GAUSS_SIGMA_PER_TAU
        return halfwidth(self.halfwidth, nu)

    def to_dict(self):
        d = {"family": self.family.value}
        if self.halfwidth is not None:
            d["halfwidth"] = self.halfwidth.to_dict()
        d["g"] = self.g
        if self.sigma0 is not None:
            d["sigma0"] = self.sigma0
        if self.family is Family.VOIGT:
            d["voigt_mix"] = self.voigt_mix
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            family = Family(d["family"])
        except (KeyError, ValueError) as exc:
            raise DataError(f"bad instrument-function family: {d.get('family')!r}") from exc
        hw = d.get("halfwidth")
        return cls(
            family=family,
            halfwidth=HalfWidthLaw.from_dict(hw) if hw is not None else None,
            g=d.get("g", 1.0),
            sigma0=d.get("sigma0"),
            voigt_mix=d.get("voigt_mix", 0.5),
        )


def dispersion_if(q, g=1.0):
    """Lorentz IF whose full width at half power is ``q * lambda``.

    The half-width is half of that, so the law coefficient is ``q / 2``.
    """
    return InstrumentFunction(
        Family.LORENTZ, HalfWidthLaw(HalfWidthMode.WAVELENGTH_PROPORTIONAL, q / 2.0), g=g
    )


def _model_sigma(sigma0, nu):
    arg = 1.0 - 0.16 * np.asarray(nu, dtype=float)
    if np.any(~(arg > 0)):
        raise DomainError("model Gaussian width undefined for 1 - 0.16 nu <= 0 (nu >= 6.25)")
    return sigma0 * np.sqrt(arg)


def _gaussian(d, sigma):
    return np.exp(-0.5 * (d / sigma) ** 2) / (np.sqrt(2.0 * np.pi) * sigma)


def _lorentz(d, tau):
    return (tau / np.pi) / (d * d + tau * tau)


def _voigt(d, tau, mix):
    if mix == 1.0:
        return _gaussian(d, tau * GAUSS_SIGMA_PER_TAU)
    if mix == 0.0:
        return _lorentz(d, tau)
    d, tau = np.broadcast_arrays(np.asarray(d, dtype=float), np.asarray(tau, dtype=float))
    flat_d, flat_tau = d.ravel(), tau.ravel()
    out = np.empty_like(flat_d)
    # one row of a kernel matrix shares tau; chunk to bound memory
    chunk = 64
    for lo in range(0, flat_d.size, chunk):
        sl = slice(lo, lo + chunk)
        out[sl] = _voigt_trapezoid(flat_d[sl], flat_tau[sl], mix)
    return out.reshape(d.shape)


def _voigt_trapezoid(d, tau, mix):
    """Convolve the Gaussian and Lorentz parts by trapezoid halving over +-40 tau."""
    sigma_g = mix * tau * GAUSS_SIGMA_PER_TAU
    tau_l = (1.0 - mix) * tau
    half = VOIGT_WINDOW * tau

    def integrand(s):
        # s in [-1, 1] scaled to t = s * half
        t = s[None, :] * half[:, None]
        return _gaussian(t, sigma_g[:, None]) * _lorentz(d[:, None] - t, tau_l[:, None])

    n = _VOIGT_START
    s = np.linspace(-1.0, 1.0, n + 1)
    f = integrand(s)
    total = (f.sum(axis=1) - 0.5 * (f[:, 0] + f[:, -1])) * (2.0 / n) * half
    while n < _VOIGT_MAX:
        mid = np.linspace(-1.0, 1.0, n + 1)[:-1] + 1.0 / n
        refined = 0.5 * total + integrand(mid).sum(axis=1) * (1.0 / n) * half
        n *= 2
        converged = np.max(np.abs(refined - total)) <= VOIGT_ATOL
        total = refined
        if converged:
            break
    return total


def evaluate(ifn, nu, nu_prime):
    """Vectorized ``g * K(nu, nu')`` with numpy broadcasting."""
    nu = np.asarray(nu, dtype=float)
    nu_prime = np.asarray(nu_prime, dtype=float)
    d = nu - nu_prime
    fam = ifn.family
    if fam is Family.MODEL_GAUSSIAN:
        k = _gaussian(d, _model_sigma(ifn.sigma0, nu))
    else:
        tau = np.asarray(halfwidth(ifn.halfwidth, nu), dtype=float)
        ad = np.abs(d)
        if fam is Family.SLOT:
            k = np.where(ad <= tau, 1.0 / (2.0 * tau), 0.0)
        elif fam is Family.TRIANGULAR:
            k = np.where(ad <= 2.0 * tau, (1.0 - ad / (2.0 * tau)) / (2.0 * tau), 0.0)
        elif fam is Family.RAYLEIGH:
            gamma = 2.0 * tau / SINC2_HALF_POWER
            k = np.sinc(d / gamma) ** 2 / gamma
        elif fam is Family.GAUSSIAN:
            k = _gaussian(d, tau * GAUSS_SIGMA_PER_TAU)
        elif fam is Family.LORENTZ:
            k = _lorentz(d, tau)
        elif fam is Family.EXPONENTIAL:
            k = LN2 / (2.0 * tau) * np.exp(-LN2 * ad / tau)
        elif fam is Family.VOIGT:
            k = _voigt(d, tau, ifn.voigt_mix)
        else:  # pragma: no cover
            raise DataError(f"unknown family {fam}")
    k = ifn.g * np.asarray(k, dtype=float)
    return k


def eval_if(ifn, nu, nu_prime):
    """Scalar kernel value ``g * K(nu, nu')``."""
    return float(evaluate(ifn, float(nu), float(nu_prime)))


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """``A[i, j] = K(row_grid[i], col_grid[j])`` with unit quadrature weights."""

    values: np.ndarray
    row_grid: Grid
    col_grid: Grid

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.row_grid.count, self.col_grid.count):
            raise DimensionError(
                f"matrix shape {v.shape} does not match grids "
                f"({self.row_grid.count}, {self.col_grid.count})"
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    def __matmul__(self, z):
        return self.values @ np.asarray(z)


def build_matrix(ifn, row_grid, col_grid):
    """Discretize the kernel on ``row_grid x col_grid`` without step-size factors."""
    rows = row_grid.nodes
    try:
        values = evaluate(ifn, rows[:, None], col_grid.nodes[None, :])
    except DomainError as exc:
        bad = _first_bad_row(ifn, rows)
        raise DomainError(f"kernel undefined at (i={bad}, j=0), nu={rows[bad]!r}: {exc}") from exc
    if not np.all(np.isfinite(values)):
        i, j = np.argwhere(~np.isfinite(values))[0]
        raise DomainError(f"non-finite kernel value at (i={i}, j={j})")
    return KernelMatrix(values, row_grid, col_grid)


def _first_bad_row(ifn, rows):
    for i, nu in enumerate(rows):
        try:
            ifn.tau(nu)
        except DomainError:
            return i
    return 0

"""Least-squares refinement of line intensities at fixed frequencies.

With the candidate frequencies frozen, the measurement model is linear in the
intensities and the background, so an overdetermined ``m x (L+1)`` system is
solved by orthogonal factorization.  Candidates whose refined intensity falls
below a threshold are reported as false lines.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DataError, DimensionError, RankDeficiencyError
from .kernels import evaluate
from .spectrum import LineSpectrum, SpectralLine

__all__ = [
    "RefinedSystem",
    "ReconstructedLine",
    "ReconstructionResult",
    "build_refined_system",
    "merge_close",
    "solve_lsm",
    "false_alarm_threshold",
    "apply_threshold",
]


@dataclass(frozen=True, eq=False)
class RefinedSystem:
    design: np.ndarray
    rhs: np.ndarray
    freqs: np.ndarray


@dataclass(frozen=True)
class ReconstructedLine:
    frequency: float
    intensity: float
    freq_error: float = float("nan")


@dataclass(frozen=True)
class ReconstructionResult:
    lines: tuple
    background: float
    threshold: float
    rejected: tuple = ()
    diagnostics: dict = field(default_factory=dict)
    background_positive: bool = True

    @property
    def k(self):
        return len(self.lines)

    def to_line_spectrum(self):
        return LineSpectrum(
            tuple(SpectralLine(l.frequency, l.intensity) for l in self.lines), self.background
        )

    def to_dict(self):
        return {
            "lines": [
                {"frequency": l.frequency, "intensity": l.intensity, "freq_error": l.freq_error}
                for l in self.lines
            ],
            "background": self.background,
            "threshold": self.threshold,
            "rejected": [
                {"frequency": l.frequency, "intensity": l.intensity, "freq_error": l.freq_error}
                for l in self.rejected
            ],
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d):
        def lines(items):
            return tuple(
                ReconstructedLine(x["frequency"], x["intensity"], x.get("freq_error", float("nan")))
                for x in items
            )

        try:
            bg = float(d["background"])
            return cls(
                lines(d["lines"]),
                bg,
                float(d["threshold"]),
                lines(d.get("rejected", [])),
                dict(d.get("diagnostics", {})),
                bg > 0,
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed reconstruction result: {exc}") from exc


def build_refined_system(ifn, nu_grid, freqs, u, band=None):
    """Design matrix ``[K(nu_i, f_j) ..., 1]`` for fixed candidate frequencies.

    ``band`` bounds the admissible frequencies and defaults to the span of
    ``nu_grid``.
    """
    freqs = np.asarray(freqs, dtype=float)
    if freqs.ndim != 1 or freqs.size == 0:
        raise DataError("need at least one candidate frequency")
    rhs = np.asarray(getattr(u, "values", u), dtype=float)
    if rhs.size != nu_grid.count:
        raise DimensionError(f"data length {rhs.size} does not match grid of {nu_grid.count}")
    lo, hi = band if band is not None else (nu_grid.start, nu_grid.end)
    outside = freqs[(freqs < lo) | (freqs > hi)]
    if outside.size:
        raise DataError(f"frequency {outside[0]!r} lies outside [{lo}, {hi}]")
    if nu_grid.count <= freqs.size:
        raise DataError(
            f"refined system is not overdetermined: m={nu_grid.count} <= L={freqs.size}"
        )
    cols = evaluate(ifn, nu_grid.nodes[:, None], freqs[None, :])
    design = np.column_stack([cols, np.ones(nu_grid.count)])
    return RefinedSystem(design, rhs, freqs)


def merge_close(peaks, min_separation):
    """Drop the lower of any two peaks closer than ``min_separation``.

    Input and output are ascending in frequency.
    """
    kept = []
    for p in sorted(peaks, key=lambda p: (-p.height, p.frequency)):
        if all(abs(p.frequency - q.frequency) >= min_separation for q in kept):
            kept.append(p)
    return sorted(kept, key=lambda p: p.frequency)


def solve_lsm(sys, rcond=None):
    """Least-squares intensities and background of a refined system.

    Uses QR with column pivoting; a diagonal entry of ``R`` below
    ``rcond * |R[0, 0]|`` signals lost rank and raises ``RankDeficiencyError``
    naming the most collinear pair of columns.
    """
    a, b = sys.design, sys.rhs
    m, n = a.shape
    if rcond is None:
        rcond = max(m, n) * np.finfo(float).eps
    q, r, perm = scipy.linalg.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag[0] == 0 or np.any(diag < rcond * diag[0]):
        bad = int(perm[int(np.argmax(diag < rcond * max(diag[0], np.finfo(float).tiny)))])
        raise RankDeficiencyError(
            f"refined system is rank deficient: {_describe_collision(sys, bad)}",
            _collision_pair(sys, bad),
        )
    y = scipy.linalg.solve_triangular(r, q.T @ b)
    x = np.empty(n)
    x[perm] = y
    return x[:-1], float(x[-1])


def _collision_pair(sys, col):
    a = sys.design
    unit = a / np.maximum(np.linalg.norm(a, axis=0), np.finfo(float).tiny)
    cos = np.abs(unit.T @ unit[:, col])
    cos[col] = -1.0
    partner = int(np.argmax(cos))
    names = [float(f) for f in sys.freqs] + ["background"]
    return names[min(col, partner)], names[max(col, partner)]


def _describe_collision(sys, col):
    first, second = _collision_pair(sys, col)
    return f"columns for {first!r} and {second!r} are numerically collinear"


def false_alarm_threshold(delta, p_fa):
    """``Z = delta * sqrt(-2 ln p_fa)`` for a false-alarm probability ``p_fa``."""
    if not 0 < p_fa < 1:
        raise DataError(f"false-alarm probability must lie in (0, 1), got {p_fa}")
    if delta < 0:
        raise DataError(f"delta must be nonnegative, got {delta}")
    return float(delta * math.sqrt(-2.0 * math.log(p_fa)))


def apply_threshold(intensities, background, freqs, Z, freq_errors=None, diagnostics=None):
    """Split candidates into accepted (intensity >= Z) and rejected lines."""
    intensities = np.asarray(intensities, dtype=float)
    freqs = np.asarray(freqs, dtype=float)
    if intensities.shape != freqs.shape:
        raise DimensionError("intensities and frequencies differ in length")
    if freq_errors is None:
        freq_errors = np.full(freqs.shape, np.nan)
    accepted, rejected = [], []
    for f, z, s in zip(freqs, intensities, freq_errors):
        line = ReconstructedLine(float(f), float(z), float(s))
        (accepted if z >= Z else rejected).append(line)
    return ReconstructionResult(
        lines=tuple(accepted),
        background=float(background),
        threshold=float(Z),
        rejected=tuple(rejected),
        diagnostics=dict(diagnostics or {}),
        background_positive=bool(background > 0),
    )

"""Local maxima of a regularized solution and their frequency-error estimates."""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, DomainError, InsufficientDataError

__all__ = [
    "Peak",
    "find_local_maxima",
    "top_L",
    "second_derivative",
    "frequency_error",
    "annotate",
]


@dataclass(frozen=True)
class Peak:
    index: int
    frequency: float
    height: float
    second_derivative: float = 0.0
    freq_error: float = 0.0


def find_local_maxima(z):
    """Interior nodes with ``z[i-1] < z[i] >= z[i+1]``.

    The strict left inequality makes the leftmost node of a plateau win.
    Boundary nodes are never reported.
    """
    v = np.asarray(z.values, dtype=float)
    if v.size < 3:
        raise InsufficientDataError("need at least 3 samples to look for maxima")
    mask = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])
    x = z.grid.nodes
    return [Peak(int(i), float(x[i]), float(v[i])) for i in np.flatnonzero(mask) + 1]


def top_L(peaks, L):
    """The ``L`` tallest peaks in ascending frequency order (ties go to lower frequency)."""
    if int(L) != L or L < 1:
        raise DataError(f"L must be a positive integer, got {L}")
    tallest = sorted(peaks, key=lambda p: (-p.height, p.frequency))[: int(L)]
    return sorted(tallest, key=lambda p: p.frequency)


def second_derivative(z, index):
    """Central second difference at an interior node."""
    v = z.values
    if not 1 <= index <= v.size - 2:
        raise DomainError(f"second difference needs an interior index, got {index}")
    h = z.grid.step
    return float((v[index - 1] - 2.0 * v[index] + v[index + 1]) / (h * h))


def frequency_error(epsilon_alpha, z2, h):
    """Line-frequency uncertainty ``sqrt(2 eps / |z''| + (h/2)**2)``.

    A flat peak (``z2 == 0``) with a nonzero error bound has no finite
    estimate; ``inf`` is returned rather than raising.
    """
    if not h > 0:
        raise DataError(f"grid step must be positive, got {h}")
    if epsilon_alpha == 0:
        return 0.5 * h
    if z2 == 0:
        return math.inf
    return math.sqrt(2.0 * epsilon_alpha / abs(z2) + 0.25 * h * h)


def annotate(z, peaks, epsilon_alpha):
    """Fill ``second_derivative`` and ``freq_error`` for each peak."""
    h = z.grid.step
    out = []
    for p in peaks:
        d2 = second_derivative(z, p.index)
        out.append(replace(p, second_derivative=d2, freq_error=frequency_error(epsilon_alpha, d2, h)))
    return out

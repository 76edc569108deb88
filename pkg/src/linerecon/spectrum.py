"""Discrete and sampled spectra and the forward measurement model."""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError
from .grid import Grid
from .kernels import build_matrix, evaluate

__all__ = [
    "Grid",
    "SpectralLine",
    "LineSpectrum",
    "SampledSpectrum",
    "NoiseModel",
    "forward_discrete",
    "forward_continuous",
    "add_noise",
]


@dataclass(frozen=True)
class SpectralLine:
    frequency: float
    intensity: float

    def __post_init__(self):
        if not (np.isfinite(self.frequency) and np.isfinite(self.intensity)):
            raise DataError(f"line values must be finite: {self}")
        object.__setattr__(self, "frequency", float(self.frequency))
        object.__setattr__(self, "intensity", float(self.intensity))


@dataclass(frozen=True)
class LineSpectrum:
    """Line list sorted by frequency plus a constant background ``F``."""

    lines: tuple = ()
    background: float = 0.0

    def __post_init__(self):
        lines = tuple(sorted(self.lines, key=lambda l: l.frequency))
        f = [l.frequency for l in lines]
        if any(b <= a for a, b in zip(f, f[1:])):
            raise DataError("line frequencies must be distinct")
        if not np.isfinite(self.background):
            raise DataError("background must be finite")
        object.__setattr__(self, "lines", lines)
        object.__setattr__(self, "background", float(self.background))

    @classmethod
    def from_arrays(cls, frequencies, intensities, background=0.0):
        if len(frequencies) != len(intensities):
            raise DimensionError("frequencies and intensities differ in length")
        return cls(
            tuple(SpectralLine(f, z) for f, z in zip(frequencies, intensities)), background
        )

    @property
    def frequencies(self):
        return np.array([l.frequency for l in self.lines], dtype=float)

    @property
    def intensities(self):
        return np.array([l.intensity for l in self.lines], dtype=float)

    def __len__(self):
        return len(self.lines)

    def to_dict(self):
        return {
            "lines": [{"frequency": l.frequency, "intensity": l.intensity} for l in self.lines],
            "background": self.background,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            lines = tuple(SpectralLine(x["frequency"], x["intensity"]) for x in d["lines"])
            return cls(lines, d.get("background", 0.0))
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed line spectrum: {exc}") from exc


@dataclass(frozen=True, eq=False)
class SampledSpectrum:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size != self.grid.count:
            raise DimensionError(
                f"{v.size} values do not match a grid of {self.grid.count} nodes"
            )
        if not np.all(np.isfinite(v)):
            raise DataError("spectrum values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def x(self):
        return self.grid.nodes

    def __len__(self):
        return self.grid.count

    def __eq__(self, other):
        if not isinstance(other, SampledSpectrum):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class NoiseModel:
    """Additive i.i.d. Gaussian noise with a fixed seed."""

    sd: float
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.sd) and self.sd >= 0):
            raise DataError(f"noise sd must be nonnegative, got {self.sd}")


def forward_discrete(truth, ifn, grid):
    """Sample ``sum_j K(nu_i, nu'_j) z_j + F`` at every node of ``grid``."""
    nu = grid.nodes
    u = np.full(nu.shape, truth.background)
    if len(truth):
        u = evaluate(ifn, nu[:, None], truth.frequencies[None, :]) @ truth.intensities + u
    return SampledSpectrum(grid, u)


def forward_continuous(z, ifn, out_grid, matrix=None):
    """Apply the unit-weight discretized integral operator to ``z``.

    ``matrix`` may be passed to reuse a prebuilt kernel matrix; its grids must
    match ``out_grid`` and ``z.grid``.
    """
    if matrix is None:
        matrix = build_matrix(ifn, out_grid, z.grid)
    elif matrix.row_grid != out_grid or matrix.col_grid != z.grid:
        raise DimensionError("kernel matrix grids do not match the requested operator")
    return SampledSpectrum(out_grid, matrix.values @ z.values)


def add_noise(clean, noise):
    """Add ``sd * N(0, 1)`` draws from a PCG64 generator seeded with ``noise.seed``."""
    if noise.sd == 0:
        return SampledSpectrum(clean.grid, clean.values)
    rng = np.random.default_rng(noise.seed)
    return SampledSpectrum(clean.grid, clean.values + noise.sd * rng.standard_normal(len(clean)))

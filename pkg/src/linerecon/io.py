"""Text formats: sampled-spectrum CSV, JSON documents, pipeline configs and plot data.

Floats in CSV files are written as ``%.17e`` so that every double survives a
round trip.  JSON documents use Python's shortest round-trip float repr.
"""

import csv
import json
import math
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError
from .grid import Grid
from .kernels import InstrumentFunction
from .metrics import MetricsReport
from .refine import ReconstructionResult
from .spectrum import LineSpectrum, SampledSpectrum

__all__ = [
    "PipelineConfig",
    "read_sampled_csv",
    "write_sampled_csv",
    "read_json",
    "write_json",
    "read_line_spectrum",
    "write_line_spectrum",
    "read_result",
    "write_result",
    "read_metrics",
    "write_metrics",
    "read_config",
    "write_config",
    "load_bundled_config",
    "write_series_csv",
    "read_series_csv",
    "write_trace_csv",
    "read_trace_csv",
    "write_peaks_csv",
    "read_peaks_csv",
    "emit_figure_data",
    "dumps",
]

UNIFORMITY_RTOL = 1e-9
THRESHOLD_MODES = ("background-frac", "false-alarm")


def _fmt(x):
    return f"{float(x):.17e}"


# --------------------------------------------------------------------------- CSV


def write_sampled_csv(spectrum, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("x,value\n")
        for x, v in zip(spectrum.x, spectrum.values):
            fh.write(f"{_fmt(x)},{_fmt(v)}\n")


def _float(text, row, what):
    try:
        val = float(text)
    except ValueError:
        raise DataError(f"row {row}: {what} {text!r} is not a number") from None
    if not math.isfinite(val):
        raise DataError(f"row {row}: {what} must be finite")
    return val


def read_sampled_csv(path):
    """Read an ``x,value`` CSV on a uniform grid.

    Raises ``DataError`` for a missing header, malformed rows, fewer than two
    rows, non-increasing ``x`` or spacing that deviates from uniform by more
    than ``1e-9 h``.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows or [c.strip() for c in rows[0]] != ["x", "value"]:
        raise DataError(f"{path}: expected header 'x,value'")
    data = rows[1:]
    if not data:
        raise DataError(f"{path}: empty spectrum (header only)")
    xs, vs = [], []
    for k, r in enumerate(data, start=2):
        if len(r) != 2:
            raise DataError(f"{path}: row {k} has {len(r)} fields, expected 2")
        xs.append(_float(r[0], k, "x"))
        vs.append(_float(r[1], k, "value"))
    if len(xs) < 2:
        raise DataError(f"{path}: need at least 2 samples")
    x = np.array(xs)
    dx = np.diff(x)
    bad = np.flatnonzero(dx <= 0)
    if bad.size:
        raise DataError(f"{path}: x is not increasing at row {bad[0] + 3}")
    grid = Grid(xs[0], xs[-1], len(xs))
    dev = np.abs(x - grid.nodes)
    worst = int(np.argmax(dev))
    if dev[worst] > UNIFORMITY_RTOL * grid.step:
        raise DataError(
            f"{path}: grid is not uniform, row {worst + 2} deviates by {dev[worst]:.3g}"
        )
    return SampledSpectrum(grid, np.array(vs))


def write_series_csv(series, path):
    """Long-format ``series,x,value`` CSV from ``{name: (x, values)}``."""
    with Path(path).open("w", newline="") as fh:
        fh.write("series,x,value\n")
        for name, (x, v) in series.items():
            for a, b in zip(np.asarray(x, dtype=float), np.asarray(v, dtype=float)):
                fh.write(f"{name},{_fmt(a)},{_fmt(b)}\n")


def read_series_csv(path):
    """Inverse of ``write_series_csv``; series keep file order."""
    out = {}
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["series", "x", "value"]:
            raise DataError(f"{path}: expected header 'series,x,value'")
        for k, r in enumerate(reader, start=2):
            if len(r) != 3:
                raise DataError(f"{path}: row {k} has {len(r)} fields, expected 3")
            xs, vs = out.setdefault(r[0], ([], []))
            xs.append(_float(r[1], k, "x"))
            vs.append(_float(r[2], k, "value"))
    return {name: (np.array(x), np.array(v)) for name, (x, v) in out.items()}


def write_trace_csv(trace, path):
    with Path(path).open("w", newline="") as fh:
        fh.write("alpha,residual\n")
        for a, r in trace:
            fh.write(f"{_fmt(a)},{_fmt(r)}\n")


def read_trace_csv(path):
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != ["alpha", "residual"]:
            raise DataError(f"{path}: expected header 'alpha,residual'")
        return [(_float(a, k, "alpha"), _float(r, k, "residual")) for k, (a, r) in enumerate(reader, 2)]


def write_peaks_csv(peaks, path):
    with Path(path).open("w", newline="") as fh:
        fh.write("frequency,height,freq_error\n")
        for p in peaks:
            fh.write(f"{_fmt(p.frequency)},{_fmt(p.height)},{_fmt(p.freq_error)}\n")


def read_peaks_csv(path):
    """Rows of ``(frequency, height, freq_error)``."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != ["frequency", "height", "freq_error"]:
            raise DataError(f"{path}: expected header 'frequency,height,freq_error'")
        rows = []
        for k, r in enumerate(reader, start=2):
            if len(r) != 3:
                raise DataError(f"{path}: row {k} has {len(r)} fields, expected 3")
            rows.append(tuple(float(c) for c in r))
    return rows


# -------------------------------------------------------------------------- JSON


def dumps(obj):
    return json.dumps(obj, indent=2) + "\n"


def write_json(obj, path):
    Path(path).write_text(dumps(obj))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc


def write_line_spectrum(spec, path):
    write_json(spec.to_dict(), path)


def read_line_spectrum(path):
    return LineSpectrum.from_dict(read_json(path))


def write_result(result, path):
    write_json(result.to_dict(), path)


def read_result(path):
    return ReconstructionResult.from_dict(read_json(path))


def write_metrics(report, path):
    write_json(report.to_dict(), path)


def read_metrics(path):
    return MetricsReport.from_dict(read_json(path))


# ------------------------------------------------------------------------ config


@dataclass(frozen=True)
class PipelineConfig:
    """All inputs of an end-to-end reconstruction.

    ``band`` is the measurement interval ``[c, d]`` sampled at ``m`` points,
    ``solution`` the interval ``[a, b]`` of the ``N``-point regularized
    solution.  ``upsample`` is the node count of the spline-resampled data on
    ``band``; ``None`` feeds the raw samples to the solver.  ``alpha=None``
    selects the parameter by the discrepancy principle.  ``window=None``
    means five solution-grid steps.
    """

    instrument: InstrumentFunction
    band: tuple
    solution: tuple
    m: int
    N: int
    upsample: object = None
    truth: object = None
    noise_sd: float = 0.0
    seed: int = 0
    delta: object = None
    alpha: object = None
    alpha_range: tuple = (1e-8, 1e2)
    L: int = 12
    threshold_mode: str = "background-frac"
    bg_frac: float = 0.2
    p_fa: float = 0.01
    p: float = 1.0
    xi: float = 0.0
    window: object = None

    def __post_init__(self):
        c, d = self.band
        a, b = self.solution
        if not (c < d and a < b):
            raise DataError("band and solution intervals must satisfy start < end")
        if self.m < 2 or self.N < 2:
            raise DataError("m and N must be at least 2")
        if self.upsample is not None and self.upsample < 4:
            raise DataError("upsample must be at least 4 nodes")
        if self.L < 1:
            raise DataError("L must be positive")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise DataError(f"threshold mode must be one of {THRESHOLD_MODES}")
        if not 0 < self.p_fa < 1:
            raise DataError("p_fa must lie in (0, 1)")
        lo, hi = self.alpha_range
        if not 0 < lo < hi:
            raise DataError("alpha range must satisfy 0 < lo < hi")
        if self.alpha is not None and not self.alpha > 0:
            raise DataError("alpha must be positive")
        object.__setattr__(self, "band", (float(c), float(d)))
        object.__setattr__(self, "solution", (float(a), float(b)))
        object.__setattr__(self, "alpha_range", (float(lo), float(hi)))

    @property
    def band_grid(self):
        return Grid(*self.band, self.m)

    @property
    def solution_grid(self):
        return Grid(*self.solution, self.N)

    @property
    def data_grid(self):
        """Grid on which the solver sees the data."""
        return self.band_grid if self.upsample is None else Grid(*self.band, self.upsample)

    @property
    def match_window(self):
        return 5.0 * self.solution_grid.step if self.window is None else float(self.window)

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self):
        return {
            "instrument": self.instrument.to_dict(),
            "band": list(self.band),
            "solution": list(self.solution),
            "m": self.m,
            "N": self.N,
            "upsample": self.upsample,
            "truth": self.truth.to_dict() if self.truth is not None else None,
            "noise": {"sd": self.noise_sd, "seed": self.seed},
            "delta": self.delta,
            "alpha": self.alpha,
            "alpha_range": list(self.alpha_range),
            "L": self.L,
            "threshold": {
                "mode": self.threshold_mode,
                "bg_frac": self.bg_frac,
                "p_fa": self.p_fa,
            },
            "p": self.p,
            "xi": self.xi,
            "window": self.window,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            noise = d.get("noise", {})
            thr = d.get("threshold", {})
            truth = d.get("truth")
            defaults = {f.name: f.default for f in fields(cls)}
            return cls(
                instrument=InstrumentFunction.from_dict(d["instrument"]),
                band=tuple(d["band"]),
                solution=tuple(d["solution"]),
                m=int(d["m"]),
                N=int(d["N"]),
                upsample=d.get("upsample"),
                truth=LineSpectrum.from_dict(truth) if truth is not None else None,
                noise_sd=noise.get("sd", 0.0),
                seed=int(noise.get("seed", 0)),
                delta=d.get("delta"),
                alpha=d.get("alpha"),
                alpha_range=tuple(d.get("alpha_range", defaults["alpha_range"])),
                L=int(d.get("L", defaults["L"])),
                threshold_mode=thr.get("mode", defaults["threshold_mode"]),
                bg_frac=thr.get("bg_frac", defaults["bg_frac"]),
                p_fa=thr.get("p_fa", defaults["p_fa"]),
                p=d.get("p", defaults["p"]),
                xi=d.get("xi", defaults["xi"]),
                window=d.get("window"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DataError):
                raise
            raise DataError(f"malformed pipeline config: {exc!r}") from exc


def read_config(path):
    return PipelineConfig.from_dict(read_json(path))


def write_config(config, path):
    write_json(config.to_dict(), path)


BUNDLED_CONFIG = "synthetic_7line.json"


def bundled_config_text(name=BUNDLED_CONFIG):
    return resources.files("linerecon.data").joinpath(name).read_text()


def load_bundled_config(name=BUNDLED_CONFIG):
    return PipelineConfig.from_dict(json.loads(bundled_config_text(name)))


# --------------------------------------------------------------- figure output


def _stems(spec):
    if spec is None:
        return np.empty(0), np.empty(0)
    return spec.frequencies, spec.intensities


def emit_figure_data(directory, truth=None, clean=None, noisy=None, smoothed=None,
                     regularized=None, trace=None, result=None):
    """Write plot-ready CSVs for whichever stage outputs are given.

    ``fig_forward.csv`` holds truth stems and the clean, noisy and smoothed
    curves; ``fig_discrepancy.csv`` the alpha scan; ``fig_regularized.csv``
    the regularized solution; ``fig_reconstruction.csv`` truth stems,
    regularized solution and refined stems.  Returns the written paths.
    """
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    if any(s is not None for s in (clean, noisy, smoothed)):
        series = {}
        if truth is not None:
            series["truth"] = _stems(truth)
        for name, s in (("clean", clean), ("noisy", noisy), ("smoothed", smoothed)):
            if s is not None:
                series[name] = (s.x, s.values)
        write_series_csv(series, out / "fig_forward.csv")
        written.append(out / "fig_forward.csv")
    if trace is not None:
        write_trace_csv(trace, out / "fig_discrepancy.csv")
        written.append(out / "fig_discrepancy.csv")
    if regularized is not None:
        write_sampled_csv(regularized, out / "fig_regularized.csv")
        written.append(out / "fig_regularized.csv")
    if result is not None:
        series = {}
        if truth is not None:
            series["truth"] = _stems(truth)
        if regularized is not None:
            series["regularized"] = (regularized.x, regularized.values)
        series["refined"] = _stems(result.to_line_spectrum())
        write_series_csv(series, out / "fig_reconstruction.csv")
        written.append(out / "fig_reconstruction.csv")
    return written

"""End-to-end reconstruction: simulate, smooth, deconvolve, refine.

Each stage is a plain function taking and returning values, so the CLI can
run them one at a time through files and still reproduce ``run_pipeline``.
"""

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ReconError
from .grid import Grid
from .kernels import build_matrix
from .metrics import evaluate_lines
from .peaks import annotate, find_local_maxima, top_L
from .refine import (
    apply_threshold,
    build_refined_system,
    false_alarm_threshold,
    merge_close,
    solve_lsm,
)
from .regularize import ErrorBudget, choose_alpha_discrepancy, solve_tikhonov
from .smoothing import estimate_noise_sd, fit_smoothing_spline, resample
from .spectrum import NoiseModel, add_noise, forward_discrete

__all__ = [
    "Deconvolution",
    "PipelineRun",
    "simulate",
    "noise_norm",
    "smooth",
    "deconvolve",
    "refine",
    "run_pipeline",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Deconvolution:
    solution: object
    trace: object
    delta: float


@dataclass(frozen=True, eq=False)
class PipelineRun:
    clean: object
    noisy: object
    smoothed: object
    deconvolution: object
    peaks: list
    result: object
    metrics: object = None


def _stage(name, hint):
    """Tag a ReconError raised inside a stage with its name and a hint."""

    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kw):
            try:
                return fn(*args, **kw)
            except ReconError as exc:
                if exc.stage is None:
                    exc.stage, exc.hint = name, hint
                raise

        return inner

    return wrap


@_stage("simulate", "check the truth line list and the instrument-function domain")
def simulate(config):
    """Clean and noisy samples of ``config.truth`` on the ``m``-point band grid."""
    if config.truth is None:
        raise DataError("config has no truth spectrum to simulate from")
    clean = forward_discrete(config.truth, config.instrument, config.band_grid)
    return clean, add_noise(clean, NoiseModel(config.noise_sd, config.seed))


def noise_norm(config, noisy):
    """Data-error norm ``delta`` of the raw measurement.

    An explicit override wins; otherwise ``sqrt(m)`` times the configured
    noise SD, or times a robust estimate from the data when none is set.
    """
    if config.delta is not None:
        return float(config.delta)
    sd = config.noise_sd if config.noise_sd > 0 else estimate_noise_sd(noisy)
    return float(math.sqrt(len(noisy)) * sd)


@_stage("smooth", "use more samples or a smaller noise level")
def smooth(noisy, config, delta):
    """Smoothing spline with residual ``delta``, resampled to ``config.upsample`` nodes.

    Without ``upsample`` the raw samples are returned unchanged.
    """
    if config.upsample is None:
        return noisy
    spline = fit_smoothing_spline(noisy, delta)
    if spline.saturated:
        log.warning("smoothing target exceeds the straight-line residual; data flattened")
    return resample(spline, Grid(noisy.grid.start, noisy.grid.end, config.upsample))


@_stage("deconvolve", "widen the alpha range, revise delta or pass an explicit alpha")
def deconvolve(data, noisy, config, delta):
    """Regularized solution on the solution grid.

    The discrepancy principle runs on the raw ``m``-point system, where
    ``delta`` is the noise norm; the chosen ``alpha`` is then applied to
    ``data``.  Returns a ``Deconvolution`` whose ``trace`` is ``None`` when
    ``config.alpha`` is set.
    """
    sol_grid = config.solution_grid
    trace = None
    alpha = config.alpha
    if alpha is None:
        raw = build_matrix(config.instrument, noisy.grid, sol_grid)
        alpha, trace = choose_alpha_discrepancy(raw, noisy, delta, *config.alpha_range)
    A = build_matrix(config.instrument, data.grid, sol_grid)
    # the noise norm grows like sqrt(samples) on a denser grid
    budget = ErrorBudget(delta * math.sqrt(len(data) / len(noisy)), config.xi, config.p)
    sol = solve_tikhonov(A, data, alpha, budget=budget)
    return Deconvolution(sol, trace, delta)


def threshold_value(config, background, delta, m):
    """Acceptance threshold for refined intensities.

    ``background-frac`` uses ``bg_frac * F`` and falls back to the
    false-alarm rule when ``F <= 0``.  The false-alarm rule uses the
    per-sample noise SD ``delta / sqrt(m)``.
    """
    if config.threshold_mode == "background-frac" and background > 0:
        return config.bg_frac * background
    return false_alarm_threshold(delta / math.sqrt(m), config.p_fa)


@_stage("refine", "reduce L or check that candidate lines are distinct")
def refine(z_alpha, epsilon_alpha, data, config, delta, m, alpha=math.nan, residual=math.nan):
    """Top-``L`` peaks of ``z_alpha`` refined by least squares against ``data``.

    Returns ``(peaks, result)``.
    """
    peaks = top_L(find_local_maxima(z_alpha), config.L)
    if not peaks:
        raise DataError("regularized solution has no interior maxima")
    peaks = annotate(z_alpha, peaks, epsilon_alpha)
    peaks = merge_close(peaks, z_alpha.grid.step)
    freqs = np.array([p.frequency for p in peaks])
    system = build_refined_system(config.instrument, data.grid, freqs, data, band=config.solution)
    intensities, background = solve_lsm(system)
    if background <= 0:
        log.warning("refined background %.4g is not positive", background)
    Z = threshold_value(config, background, delta, m)
    result = apply_threshold(
        intensities,
        background,
        freqs,
        Z,
        freq_errors=[p.freq_error for p in peaks],
        diagnostics={
            "alpha": float(alpha),
            "residual": float(residual),
            "epsilon_alpha": float(epsilon_alpha),
            "delta": float(delta),
        },
    )
    return peaks, result


def run_pipeline(config, noisy=None):
    """All stages in sequence.

    ``noisy`` defaults to data simulated from ``config.truth``.  Metrics are
    filled in whenever the config carries a truth spectrum.
    """
    clean = None
    if noisy is None:
        clean, noisy = simulate(config)
    elif len(noisy) != config.m:
        log.info("input has %d samples; config m=%d ignored", len(noisy), config.m)
    delta = noise_norm(config, noisy)
    data = smooth(noisy, config, delta)
    dec = deconvolve(data, noisy, config, delta)
    sol = dec.solution
    peaks, result = refine(
        sol.z_alpha, sol.epsilon_alpha, data, config, delta, len(noisy), sol.alpha, sol.residual
    )
    metrics = None
    if config.truth is not None:
        metrics = evaluate_lines(result.to_line_spectrum(), config.truth, config.match_window)
    return PipelineRun(clean, noisy, data, dec, peaks, result, metrics)

"""Line-spectrum reconstruction by regularized integral approximation.

A measured spectrum is modelled as a sum of instrument-function copies of
discrete lines plus a constant background.  Reconstruction replaces the
nonlinear line fit by a Tikhonov-regularized Fredholm inversion on a fine
grid, picks the tallest maxima, and refines their intensities by linear least
squares.
"""

from .errors import (
    BracketError,
    DataError,
    DimensionError,
    DomainError,
    InsufficientDataError,
    NumericalError,
    RankDeficiencyError,
    ReconError,
)
from .grid import Grid
from .io import PipelineConfig, load_bundled_config, read_config, write_config
from .kernels import (
    Family,
    HalfWidthLaw,
    HalfWidthMode,
    InstrumentFunction,
    KernelMatrix,
    build_matrix,
    dispersion_if,
    eval_if,
    evaluate,
)
from .metrics import MetricsReport, compute_metrics, evaluate_lines, match_lines
from .pipeline import PipelineRun, run_pipeline
from .peaks import Peak, annotate, find_local_maxima, frequency_error, second_derivative, top_L
from .refine import (
    ReconstructedLine,
    ReconstructionResult,
    apply_threshold,
    build_refined_system,
    false_alarm_threshold,
    merge_close,
    solve_lsm,
)
from .regularize import (
    ErrorBudget,
    RegularizedSolution,
    choose_alpha_discrepancy,
    discrepancy_curve,
    error_bound,
    error_estimate,
    residual_norm,
    solve_tikhonov,
    spectral_norm,
)
from .smoothing import (
    SmoothingSpline,
    estimate_noise_sd,
    fit_smoothing_spline,
    resample,
    spline_with_weight,
)
from .spectrum import (
    LineSpectrum,
    NoiseModel,
    SampledSpectrum,
    SpectralLine,
    add_noise,
    forward_continuous,
    forward_discrete,
)

__version__ = "0.1.0"

"""Command-line front end.

Subcommands run the whole reconstruction (``pipeline``) or a single stage
(``simulate``, ``smooth``, ``deconvolve``, ``refine``) and ``evaluate``
compares a result with a truth spectrum.  Tables go to stdout, artifacts to
files.  Exit codes: 1 usage, 2 bad data or I/O, 3 numerical failure.
"""

import argparse
import logging
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import io
from .errors import DataError, NumericalError, ReconError
from .metrics import evaluate_lines
from .pipeline import deconvolve, noise_norm, refine, run_pipeline, simulate, smooth

EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config_flags(p):
    p.add_argument("--config", type=Path, help="pipeline config JSON (default: bundled 7-line config)")
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-sd", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--upsample", type=int)
    p.add_argument("--no-upsample", action="store_true", help="feed raw samples to the solver")
    p.add_argument("--delta", type=float, help="override the data-error norm")
    p.add_argument("--alpha", type=float, help="fixed regularization parameter")
    p.add_argument("--alpha-lo", type=float)
    p.add_argument("--alpha-hi", type=float)
    p.add_argument("--L", type=int)
    p.add_argument("--threshold-mode", choices=io.THRESHOLD_MODES)
    p.add_argument("--bg-frac", type=float)
    p.add_argument("--p-fa", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--xi", type=float)
    p.add_argument("--window", type=float)


def _load_config(args):
    cfg = io.read_config(args.config) if args.config else io.load_bundled_config()
    lo = args.alpha_lo if args.alpha_lo is not None else cfg.alpha_range[0]
    hi = args.alpha_hi if args.alpha_hi is not None else cfg.alpha_range[1]
    cfg = cfg.with_overrides(
        seed=args.seed,
        noise_sd=args.noise_sd,
        m=args.m,
        N=args.N,
        upsample=args.upsample,
        delta=args.delta,
        alpha=args.alpha,
        alpha_range=(lo, hi),
        L=args.L,
        threshold_mode=args.threshold_mode,
        bg_frac=args.bg_frac,
        p_fa=args.p_fa,
        p=args.p,
        xi=args.xi,
        window=args.window,
    )
    if args.no_upsample:
        cfg = replace(cfg, upsample=None)
    return cfg


def _out(args):
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _print_result(result, metrics=None):
    d = result.diagnostics
    print(f"k = {result.k}   F = {result.background:.6g}   Z = {result.threshold:.6g}")
    if "alpha" in d:
        print(
            f"alpha = {d['alpha']:.6g} (log10 {math.log10(d['alpha']):.3f})   "
            f"residual = {d['residual']:.6g}   eps(alpha) = {d['epsilon_alpha']:.6g}"
        )
    if not result.background_positive:
        print("warning: refined background is not positive")
    print(f"{'frequency':>12} {'intensity':>12} {'sigma':>10}  status")
    rows = [(l, "accepted") for l in result.lines] + [(l, "rejected") for l in result.rejected]
    for line, status in sorted(rows, key=lambda r: r[0].frequency):
        print(f"{line.frequency:12.6g} {line.intensity:12.6g} {line.freq_error:10.4g}  {status}")
    if metrics is not None:
        _print_metrics(metrics)


def _print_metrics(m):
    print(
        f"eps = {m.eps:.6g}   xi = {m.xi:.6g}   eps_rel = {m.eps_rel:.6g}   "
        f"xi_rel = {m.xi_rel:.6g}   zeta_rel = {m.zeta_rel:.6g}"
    )


# ------------------------------------------------------------------- commands


def cmd_simulate(args):
    cfg = _load_config(args)
    if args.truth:
        cfg = replace(cfg, truth=io.read_line_spectrum(args.truth))
    clean, noisy = simulate(cfg)
    out = _out(args)
    io.write_sampled_csv(clean, out / "clean.csv")
    io.write_sampled_csv(noisy, out / "noisy.csv")
    io.write_line_spectrum(cfg.truth, out / "truth.json")
    print(f"simulated {len(noisy)} samples on [{noisy.grid.start}, {noisy.grid.end}], seed {cfg.seed}")
    return 0


def cmd_smooth(args):
    cfg = _load_config(args)
    noisy = io.read_sampled_csv(args.input)
    delta = noise_norm(cfg, noisy)
    data = smooth(noisy, cfg, delta)
    out = _out(args)
    io.write_sampled_csv(data, out / "smoothed.csv")
    print(f"delta = {delta:.6g}   {len(noisy)} -> {len(data)} samples")
    return 0


def cmd_deconvolve(args):
    cfg = _load_config(args)
    data = io.read_sampled_csv(args.input)
    noisy = io.read_sampled_csv(args.raw) if args.raw else data
    delta = noise_norm(cfg, noisy)
    dec = deconvolve(data, noisy, cfg, delta)
    sol = dec.solution
    out = _out(args)
    io.emit_figure_data(out, regularized=sol.z_alpha, trace=dec.trace)
    io.write_json(
        {
            "alpha": sol.alpha,
            "residual": sol.residual,
            "epsilon_alpha": sol.epsilon_alpha,
            "op_norm": sol.op_norm,
            "delta": delta,
            "m": len(noisy),
        },
        out / "regularization.json",
    )
    print(
        f"alpha = {sol.alpha:.6g}   residual = {sol.residual:.6g}   "
        f"||z|| = {sol.norm:.6g}   eps(alpha) = {sol.epsilon_alpha:.6g}"
    )
    return 0


def cmd_refine(args):
    cfg = _load_config(args)
    z = io.read_sampled_csv(args.regularized)
    data = io.read_sampled_csv(args.input)
    reg = io.read_json(args.regularization)
    try:
        alpha, residual, eps = reg["alpha"], reg["residual"], reg["epsilon_alpha"]
        delta, m = reg["delta"], reg["m"]
    except KeyError as exc:
        raise DataError(f"{args.regularization}: missing field {exc}") from exc
    peaks, result = refine(z, eps, data, cfg, delta, m, alpha, residual)
    out = _out(args)
    io.write_peaks_csv(peaks, out / "peaks.csv")
    io.write_result(result, out / "result.json")
    _print_result(result)
    return 0


def cmd_pipeline(args):
    cfg = _load_config(args)
    if args.truth:
        cfg = replace(cfg, truth=io.read_line_spectrum(args.truth))
    noisy = io.read_sampled_csv(args.input) if args.input else None
    if noisy is None and cfg.truth is None:
        raise DataError("pipeline needs --input or a truth spectrum to simulate from")
    t0 = time.perf_counter()
    run = run_pipeline(cfg, noisy)
    elapsed = time.perf_counter() - t0
    out = _out(args)
    sol = run.deconvolution.solution
    io.emit_figure_data(
        out,
        truth=cfg.truth,
        clean=run.clean,
        noisy=run.noisy,
        smoothed=run.smoothed if run.smoothed is not run.noisy else None,
        regularized=sol.z_alpha,
        trace=run.deconvolution.trace,
        result=run.result,
    )
    io.write_peaks_csv(run.peaks, out / "peaks.csv")
    io.write_result(run.result, out / "result.json")
    if run.metrics is not None:
        io.write_metrics(run.metrics, out / "metrics.json")
    _print_result(run.result, run.metrics)
    print(f"elapsed {elapsed:.3f} s")
    return 0


def cmd_evaluate(args):
    result = io.read_result(args.result)
    truth = io.read_line_spectrum(args.truth)
    report = evaluate_lines(result.to_line_spectrum(), truth, args.window)
    io.write_metrics(report, args.output)
    _print_metrics(report)
    return 0


def build_parser():
    parser = _Parser(prog="linerecon", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="synthesize clean and noisy data from a truth spectrum")
    _config_flags(p)
    p.add_argument("--truth", type=Path, help="truth LineSpectrum JSON (overrides the config)")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("smooth", help="smoothing spline and resampling")
    _config_flags(p)
    p.add_argument("--input", type=Path, required=True, help="noisy x,value CSV")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("deconvolve", help="regularized inversion")
    _config_flags(p)
    p.add_argument("--input", type=Path, required=True, help="data CSV fed to the solver")
    p.add_argument("--raw", type=Path, help="raw noisy CSV for the discrepancy principle")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_deconvolve)

    p = sub.add_parser("refine", help="peak selection, least-squares refinement, threshold")
    _config_flags(p)
    p.add_argument("--regularized", type=Path, required=True)
    p.add_argument("--regularization", type=Path, required=True, help="regularization.json")
    p.add_argument("--input", type=Path, required=True, help="data CSV fed to the solver")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("pipeline", help="all stages end to end")
    _config_flags(p)
    p.add_argument("--input", type=Path, help="noisy x,value CSV (default: simulate)")
    p.add_argument("--truth", type=Path, help="truth LineSpectrum JSON")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("evaluate", help="metrics of a result against a truth spectrum")
    p.add_argument("--result", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--window", type=float, default=0.025)
    p.add_argument("--output", type=Path, default=Path("metrics.json"))
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except NumericalError as exc:
        _report(exc)
        return EXIT_NUMERICAL
    except ReconError as exc:
        _report(exc)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def _report(exc):
    where = f"[{exc.stage}] " if exc.stage else ""
    print(f"error: {where}{exc}", file=sys.stderr)
    if exc.hint:
        print(f"hint: {exc.hint}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())

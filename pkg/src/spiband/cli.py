"""Command-line entry point: ``spiband <subcommand> [flags]``.

Exit codes: 0 success, 1 data or estimation error, 2 usage error.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import kernels
from .curves import project_band
from .errors import InvalidConfigError, SpibandError
from .estimators import METHODS, GspieConfig, bonferroni_band, estimate_bands, gspie_split
from .evaluation import (
    calibration_experiment,
    coverage_report,
    discretization_sweep,
    generate,
    tightness_experiment,
)
from .io import (
    read_band_json,
    read_sample_csv,
    render_band_svg,
    write_band_json,
    write_report_csv,
    write_report_json,
    write_sample_csv,
)
from .synth import default_latent_gaussian, default_weibull, derive_seed

log = logging.getLogger("spiband")


class UsageError(Exception):
    pass


def _alpha(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid alpha {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {value}")
    return value


def _alpha_list(text):
    return [_alpha(part) for part in text.split(",") if part.strip()]


def _method_list(text):
    methods = [m.strip() for m in text.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise argparse.ArgumentTypeError(
                f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    return methods


def _int_list(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}") from None


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _fraction(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"split must lie in (0, 1), got {value}")
    return value


def _default_seed():
    raw = os.environ.get("SPIBAND_SEED")
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SPIBAND_SEED must be an integer, got {raw!r}") from None


def _common(p):
    p.add_argument("--seed", type=int, default=None,
                   help="random seed (default: $SPIBAND_SEED or 0)")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="cap on worker threads")
    p.add_argument("--bootstrap-reps", type=_positive_int, default=1000)
    p.add_argument("--split", type=_fraction, default=0.5,
                   help="GSPIE optimization fraction")
    p.add_argument("--no-monotone-projection", action="store_true",
                   help="skip projecting band walls into survival space")


def _generator_flags(p, kind_default="latent-gaussian"):
    g = p.add_argument_group("generator")
    g.add_argument("--generator", choices=("latent-gaussian", "weibull"), default=kind_default)
    g.add_argument("--n-times", type=int, default=32)
    g.add_argument("--horizon", type=float, default=60.0)
    g.add_argument("--correlation-decay", type=float, default=0.002)
    g.add_argument("--noise-scale", type=float, default=0.5)
    g.add_argument("--median-scale", type=float, default=24.0)
    g.add_argument("--scale-spread", type=float, default=0.3)
    g.add_argument("--median-shape", type=float, default=1.2)
    g.add_argument("--shape-spread", type=float, default=0.2)


def _build_generator(args):
    if args.n_times < 1 or args.horizon <= 0:
        raise InvalidConfigError("--n-times must be >= 1 and --horizon positive")
    if args.generator == "weibull":
        if args.median_scale <= 0 or args.median_shape <= 0:
            raise InvalidConfigError("Weibull medians must be positive")
        return default_weibull(args.n_times, args.horizon, args.median_scale,
                               args.scale_spread, args.median_shape, args.shape_spread)
    return default_latent_gaussian(args.n_times, args.horizon, args.correlation_decay,
                                   args.noise_scale)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spiband", description="Simultaneous prediction intervals for sampled curves.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate a band from a sample CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--method", choices=METHODS, default="gspie")
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--no-resample", action="store_true",
                   help="Olshen variants: use the original set as the only bootstrap set")
    p.add_argument("--plot", metavar="SVG", default=None)
    p.add_argument("--dump-partitions", metavar="JSON", default=None,
                   help="GSPIE: write optimization/validation row indices")
    _common(p)

    p = sub.add_parser("evaluate", help="coverage and width of a band on test curves")
    p.add_argument("--band", required=True)
    p.add_argument("--input", required=True, help="test sample CSV")
    p.add_argument("--baseline-input", default=None,
                   help="estimation CSV for the Bonferroni reference band")
    p.add_argument("--output", default=None)

    p = sub.add_parser("generate", help="write synthetic curves to a sample CSV")
    p.add_argument("--output", required=True)
    p.add_argument("--count", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    _generator_flags(p)

    p = sub.add_parser("calibrate", help="observed vs prescribed coverage")
    p.add_argument("--methods", type=_method_list, default=list(METHODS))
    p.add_argument("--alphas", type=_alpha_list, default=[0.01, 0.05, 0.1, 0.2])
    p.add_argument("--trials", type=_positive_int, default=50)
    p.add_argument("--est-samples", type=_positive_int, default=1000)
    p.add_argument("--test-samples", type=_positive_int, default=10000)
    p.add_argument("--output", default="calibration.csv")
    p.add_argument("--summary", default=None, help="aggregate JSON (default: OUTPUT.json)")
    _common(p)
    _generator_flags(p)

    p = sub.add_parser("tightness", help="percent width change vs Bonferroni")
    p.add_argument("--methods", type=_method_list, default=["olshen", "olshen2", "gspie"])
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--trials", type=_positive_int, default=50)
    p.add_argument("--est-samples", type=_positive_int, default=1000)
    p.add_argument("--output", default="tightness.csv")
    p.add_argument("--summary", default=None)
    _common(p)
    _generator_flags(p)

    p = sub.add_parser("sweep-discretization", help="band width vs grid resolution")
    p.add_argument("--methods", type=_method_list, default=["olshen", "olshen2", "gspie"])
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--grid-sizes", type=_int_list, default=[8, 16, 32, 64, 128, 256, 512])
    p.add_argument("--trials", type=_positive_int, default=20)
    p.add_argument("--est-samples", type=_positive_int, default=1000)
    p.add_argument("--output", default="sweep.csv")
    p.add_argument("--summary", default=None)
    _common(p)
    _generator_flags(p, kind_default="weibull")
    return parser


def _seed(args):
    return args.seed if args.seed is not None else _default_seed()


def run_estimate(args):
    samples = read_sample_csv(args.input)
    seed = _seed(args)
    band = estimate_bands(args.method, samples, [args.alpha], seed=seed,
                          bootstrap_reps=args.bootstrap_reps, split_fraction=args.split,
                          resample=not args.no_resample)[0]
    project = not args.no_monotone_projection
    if project:
        band = project_band(band)
    config = {
        "bootstrap_reps": args.bootstrap_reps if args.method in ("olshen", "olshen2") else None,
        "resample": not args.no_resample,
        "split_fraction": args.split if args.method == "gspie" else None,
        "monotone_projection": project,
        "source": str(args.input),
        "n_samples": samples.m,
    }
    write_band_json(band, {"method": args.method, "alpha": args.alpha, "seed": seed,
                           "config": config}, args.output)
    if args.plot:
        render_band_svg(band, args.plot, curve=np.median(samples.rows, axis=0))
    if args.dump_partitions:
        if args.method != "gspie":
            raise UsageError("--dump-partitions only applies to --method gspie")
        opt_idx, val_idx = gspie_split(samples.m, GspieConfig(args.alpha, args.split, seed))
        Path(args.dump_partitions).write_text(json.dumps(
            {"optimization": opt_idx.tolist(), "validation": val_idx.tolist()}) + "\n")
    log.info("wrote %s band to %s", args.method, args.output)
    return 0


def run_evaluate(args):
    band, meta = read_band_json(args.band)
    test = read_sample_csv(args.input)
    baseline = None
    if args.baseline_input:
        ref = read_sample_csv(args.baseline_input)
        if meta.get("alpha") is None:
            raise SpibandError("band JSON has no alpha to rebuild the baseline with")
        baseline = bonferroni_band(ref, meta["alpha"])
        if (meta.get("config") or {}).get("monotone_projection", True):
            baseline = project_band(baseline)
        if baseline.grid != band.grid:
            raise SpibandError("baseline samples and band use different time grids")
    report = coverage_report(band, test, baseline)
    doc = report.to_dict()
    doc.update({"method": meta.get("method"), "alpha": meta.get("alpha")})
    text = json.dumps(doc, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def run_generate(args):
    try:
        cfg = _build_generator(args)
    except SpibandError as exc:
        raise UsageError(str(exc)) from exc
    samples = generate(replace(cfg, seed=derive_seed(_seed(args), 0)), args.count)
    write_sample_csv(samples, args.output)
    return 0


def _finish_experiment(args, report, name):
    write_report_csv(report, args.output)
    summary = args.summary or str(Path(args.output).with_suffix(".json"))
    write_report_json(report, summary, {"experiment": name, "seed": _seed(args),
                                        "backend": kernels.BACKEND})
    for row in report.aggregate():
        log.info("%s alpha=%g n=%d coverage=%.4f width=%.4f change=%.2f%%",
                 row["method"], row["alpha"], row["grid_size"], row["mean_coverage"],
                 row["mean_width"], row["mean_percent_change"])
    return 0


def run_experiments(args):
    try:
        generator = _build_generator(args)
    except SpibandError as exc:
        raise UsageError(str(exc)) from exc
    common = dict(seed=_seed(args), bootstrap_reps=args.bootstrap_reps,
                  split_fraction=args.split, project=not args.no_monotone_projection)
    if args.command == "calibrate":
        report = calibration_experiment(generator, args.methods, args.alphas, args.trials,
                                        args.est_samples, args.test_samples, **common)
    elif args.command == "tightness":
        report = tightness_experiment(generator, args.methods, args.alpha, args.trials,
                                      args.est_samples, **common)
    else:
        if args.generator != "weibull":
            raise UsageError("sweep-discretization requires --generator weibull")
        report = discretization_sweep(generator, args.methods, args.alpha, args.grid_sizes,
                                      args.trials, args.est_samples, **common)
    return _finish_experiment(args, report, args.command)


COMMANDS = {
    "estimate": run_estimate,
    "evaluate": run_evaluate,
    "generate": run_generate,
    "calibrate": run_experiments,
    "tightness": run_experiments,
    "sweep-discretization": run_experiments,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "threads", None):
        kernels.set_threads(args.threads)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"spiband: error: {exc}", file=sys.stderr)
        return 2
    except InvalidConfigError as exc:
        if args.command in ("calibrate", "tightness", "sweep-discretization", "generate"):
            print(f"spiband: error: {exc}", file=sys.stderr)
            return 2
        print(f"spiband: {exc}", file=sys.stderr)
        return 1
    except SpibandError as exc:
        print(f"spiband: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

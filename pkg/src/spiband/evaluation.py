"""Coverage and tightness metrics and the Monte-Carlo experiment harnesses."""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .curves import SampleMatrix, TimeGrid, project_band
from .errors import DimensionMismatchError, InvalidConfigError, ZeroBaselineError
from .estimators import METHODS, bonferroni_band, estimate_bands
from .synth import (
    LatentGaussianConfig,
    WeibullFamilyConfig,
    derive_seed,
    gen_latent_gaussian_curves,
    gen_weibull_curves,
)

REPORT_COLUMNS = ("trial", "method", "alpha", "grid_size",
                  "observed_coverage", "average_width", "percent_change")


@dataclass(frozen=True)
class CoverageReport:
    observed_coverage: float
    n_test_samples: int
    average_width: float
    percent_change_vs_baseline: float | None = None
    covered_count: int = 0

    def to_dict(self):
        return {
            "observed_coverage": self.observed_coverage,
            "covered_count": self.covered_count,
            "n_test_samples": self.n_test_samples,
            "average_width": self.average_width,
            "percent_change_vs_baseline": self.percent_change_vs_baseline,
        }


def _check_grid(band, test):
    if isinstance(test, SampleMatrix):
        if test.grid != band.grid:
            raise DimensionMismatchError("test samples and band use different time grids")
        return test.rows
    rows = np.asarray(test, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[:, None]
    if rows.shape[1] != band.n:
        raise DimensionMismatchError(
            f"test rows have {rows.shape[1]} time points, band has {band.n}")
    return rows


def covered_count(band, test):
    rows = _check_grid(band, test)
    inside = np.all((rows >= band.lower) & (rows <= band.upper), axis=1)
    return int(np.count_nonzero(inside))


def observed_coverage(band, test):
    """Fraction of test curves lying inside ``band`` (walls count as inside)."""
    rows = _check_grid(band, test)
    if rows.shape[0] == 0:
        raise InvalidConfigError("observed coverage of an empty test set")
    return covered_count(band, rows) / rows.shape[0]


def average_width(band):
    return float(np.mean(band.upper - band.lower))


def percent_change(width, baseline_width):
    """``100 * (width - baseline) / baseline``; 0 when both widths are 0."""
    if baseline_width <= 0:
        if baseline_width == 0 and width == 0:
            return 0.0
        raise ZeroBaselineError(f"baseline width must be positive, got {baseline_width}")
    return 100.0 * (width - baseline_width) / baseline_width


def coverage_report(band, test, baseline=None):
    """Coverage, width and (optionally) percent change versus ``baseline``."""
    rows = _check_grid(band, test)
    hits = covered_count(band, rows)
    width = average_width(band)
    change = None if baseline is None else percent_change(width, average_width(baseline))
    return CoverageReport(hits / rows.shape[0], rows.shape[0], width, change, hits)


def generate(cfg, count):
    """Draw ``count`` curves from either synthetic family."""
    if isinstance(cfg, WeibullFamilyConfig):
        return gen_weibull_curves(cfg, count)
    if isinstance(cfg, LatentGaussianConfig):
        return gen_latent_gaussian_curves(cfg, count)
    raise InvalidConfigError(f"unsupported generator config {type(cfg).__name__}")


@dataclass
class ExperimentReport:
    """Per-trial rows plus aggregates recomputed from them on demand."""

    rows: list = field(default_factory=list)

    def add(self, trial, method, alpha, grid_size, coverage, width, change):
        self.rows.append({
            "trial": int(trial),
            "method": method,
            "alpha": float(alpha),
            "grid_size": int(grid_size),
            "observed_coverage": float(coverage),
            "average_width": float(width),
            "percent_change": float(change),
        })

    def aggregate(self):
        """One row per (method, alpha, grid size), in first-seen order.

        Width intervals are mean +/- 1.96 standard errors across trials.
        """
        groups = {}
        for row in self.rows:
            groups.setdefault((row["method"], row["alpha"], row["grid_size"]), []).append(row)
        out = []
        for (method, alpha, grid_size), rows in groups.items():
            cov = np.array([r["observed_coverage"] for r in rows])
            width = np.array([r["average_width"] for r in rows])
            change = np.array([r["percent_change"] for r in rows])
            k = len(rows)
            ddof = 1 if k > 1 else 0
            sem = float(width.std(ddof=ddof)) / math.sqrt(k)
            out.append({
                "method": method,
                "alpha": alpha,
                "grid_size": grid_size,
                "trials": k,
                "mean_coverage": float(cov.mean()),
                "std_coverage": float(cov.std(ddof=ddof)),
                "mean_width": float(width.mean()),
                "std_width": float(width.std(ddof=ddof)),
                "width_ci_low": float(width.mean()) - 1.96 * sem,
                "width_ci_high": float(width.mean()) + 1.96 * sem,
                "mean_percent_change": float(change.mean()),
                "std_percent_change": float(change.std(ddof=ddof)),
            })
        return out

    def lookup(self, method, alpha=None, grid_size=None):
        for row in self.aggregate():
            if row["method"] != method:
                continue
            if alpha is not None and not math.isclose(row["alpha"], alpha):
                continue
            if grid_size is not None and row["grid_size"] != grid_size:
                continue
            return row
        raise KeyError((method, alpha, grid_size))


def _check_methods(methods):
    methods = list(methods)
    for method in methods:
        if method not in METHODS:
            raise InvalidConfigError(f"unknown method {method!r}")
    return methods


def _run_trial(report, trial, generator, methods, alphas, est_samples, test_samples,
               seed, bootstrap_reps, split_fraction, project):
    est = generate(replace(generator, seed=derive_seed(seed, trial, 0)), est_samples)
    test = None
    if test_samples:
        test = generate(replace(generator, seed=derive_seed(seed, trial, 1)), test_samples)
    finish = project_band if project else (lambda b: b)
    baselines = [finish(bonferroni_band(est, a)) for a in alphas]
    method_seed = derive_seed(seed, trial, 2)
    for method in methods:
        if method == "bonferroni":
            bands = baselines
        else:
            bands = [finish(b) for b in estimate_bands(
                method, est, alphas, seed=method_seed, bootstrap_reps=bootstrap_reps,
                split_fraction=split_fraction)]
        for alpha, band, base in zip(alphas, bands, baselines):
            coverage = observed_coverage(band, test) if test is not None else float("nan")
            width = average_width(band)
            report.add(trial, method, alpha, est.n, coverage, width,
                       percent_change(width, average_width(base)))


def calibration_experiment(generator, methods, alphas, trials, est_samples=1000,
                           test_samples=10000, seed=0, bootstrap_reps=1000,
                           split_fraction=0.5, project=True):
    """Observed coverage of each method on fresh curves from the same truth.

    Every trial regenerates estimation and test curves from independent
    substreams of ``seed``, so trials are i.i.d. and order independent.
    """
    if trials < 1:
        raise InvalidConfigError("trials must be at least 1")
    methods = _check_methods(methods)
    report = ExperimentReport()
    for trial in range(trials):
        _run_trial(report, trial, generator, methods, list(alphas), est_samples,
                   test_samples, seed, bootstrap_reps, split_fraction, project)
    return report


def tightness_experiment(generator, methods, alpha, trials, est_samples=1000, seed=0,
                         bootstrap_reps=1000, split_fraction=0.5, project=True,
                         test_samples=0):
    """Percent change in average width versus the Bonferroni band, per trial."""
    return calibration_experiment(generator, methods, [alpha], trials, est_samples,
                                  test_samples, seed, bootstrap_reps, split_fraction,
                                  project)


def sweep_grid(horizon, size):
    """Evenly spaced grid ``horizon/size, 2*horizon/size, ..., horizon``."""
    return TimeGrid(horizon * np.arange(1, size + 1) / size)


def discretization_sweep(generator, methods, alpha, grid_sizes, trials, est_samples=1000,
                         seed=0, bootstrap_reps=1000, split_fraction=0.5, project=True,
                         horizon=None):
    """Average width as the time grid over a fixed horizon gets finer.

    Trial ``i`` reuses the same generator seed at every grid size, so each
    size sees the same underlying curves at a different resolution.
    """
    grid_sizes = [int(g) for g in grid_sizes]
    if not grid_sizes or min(grid_sizes) < 2:
        raise InvalidConfigError("grid sizes must be non-empty and each at least 2")
    if trials < 1:
        raise InvalidConfigError("trials must be at least 1")
    methods = _check_methods(methods)
    if horizon is None:
        horizon = float(generator.grid.times[-1])
    report = ExperimentReport()
    for size in grid_sizes:
        gen = replace(generator, grid=sweep_grid(horizon, size))
        for trial in range(trials):
            _run_trial(report, trial, gen, methods, [alpha], est_samples, 0, seed,
                       bootstrap_reps, split_fraction, project)
    return report

"""Simultaneous prediction interval estimators.

Four estimators map a sample matrix and a miscoverage level ``alpha`` to a
:class:`~spiband.curves.Band`:

* :func:`olshen` -- ``mean +/- k * std`` with ``k`` calibrated on bootstrap sets
* :func:`two_sided_olshen` -- ``median - k * s_minus``, ``median + k * s_plus``
* :func:`gspie` -- greedy wall retraction stopped by a validation split
* :func:`bonferroni_band` -- pointwise ogive percentiles at level ``alpha / n``
"""
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .curves import Band, as_samples, check_alpha
from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    InvalidConfigError,
    TooFewSamplesError,
)
from .synth import bootstrap_indices, substream

METHODS = ("olshen", "olshen2", "gspie", "bonferroni")


@dataclass(frozen=True)
class OlshenConfig:
    """Knobs shared by both Olshen variants.

    With ``resample=False`` the original sample set is used as the single
    "bootstrap" set, which makes the estimator deterministic.  ``ddof`` only
    changes the standard-deviation denominator; the resulting band does not
    depend on it.
    """

    alpha: float = 0.05
    bootstrap_reps: int = 1000
    seed: int = 0
    resample: bool = True
    ddof: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        if int(self.bootstrap_reps) < 1:
            raise InvalidConfigError("bootstrap_reps must be at least 1")
        if not self.resample:
            object.__setattr__(self, "bootstrap_reps", 1)
        if self.ddof not in (0, 1):
            raise InvalidConfigError("ddof must be 0 or 1")


@dataclass(frozen=True)
class GspieConfig:
    alpha: float = 0.05
    split_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        if not 0.0 < self.split_fraction < 1.0:
            raise InvalidConfigError("split_fraction must lie strictly between 0 and 1")


@dataclass(frozen=True)
class ColumnStats:
    mu: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class TwoSidedStats:
    med: np.ndarray
    sigma_minus: np.ndarray
    sigma_plus: np.ndarray


@dataclass(frozen=True)
class GspieStep:
    """One candidate wall retraction."""

    wall: str  # "lower" or "upper"
    time_index: int
    new_value: float
    width_reduction: float
    excluded_count: int
    score: float


def _rows(samples, minimum):
    rows = as_samples(samples).rows
    if rows.shape[0] < minimum:
        raise TooFewSamplesError(f"need at least {minimum} samples, got {rows.shape[0]}")
    return rows


def column_stats(samples, ddof=0):
    """Per-time mean and standard deviation (denominator ``m - ddof``)."""
    rows = _rows(samples, 2)
    mu, sigma, _ = kernels.center_spread(rows, ddof, False)
    return ColumnStats(mu, sigma)


def two_sided_stats(samples):
    """Per-time median and one-sided RMS deviations from it.

    ``sigma_plus`` uses the values ``>= median``, ``sigma_minus`` the values
    ``<= median``; values equal to the median enter both.
    """
    rows = _rows(samples, 2)
    med, s_minus, s_plus = kernels.center_spread(rows, 0, True)
    return TwoSidedStats(med, s_minus, s_plus)


def _center_and_spreads(stats):
    if isinstance(stats, TwoSidedStats):
        return stats.med, stats.sigma_minus, stats.sigma_plus
    return stats.mu, stats.sigma, stats.sigma


def sample_max_distance(sample, stats):
    """Smallest ``k`` whose orthotope around ``stats`` contains ``sample``.

    A zero spread contributes 0 if the sample sits on the center (within
    1e-12) and infinity otherwise.
    """
    center, s_minus, s_plus = _center_and_spreads(stats)
    sample = np.asarray(sample, dtype=np.float64)
    if sample.shape != center.shape:
        raise DimensionMismatchError(
            f"sample has shape {sample.shape}, statistics have {center.shape}")
    return float(kernels.max_distances_numpy(sample[None, :], center, s_minus, s_plus)[0])


def required_count(alpha, total):
    """Smallest integer ``c`` with ``c / total >= 1 - alpha``, in exact arithmetic."""
    return math.ceil((1 - Fraction(float(alpha))) * int(total))


def critical_k(distances, alpha):
    """Smallest ``k`` at which mean bootstrap coverage reaches ``1 - alpha``.

    Every bootstrap set has the same size, so the mean of per-set coverages
    equals the pooled fraction of distances ``<= k`` and the answer is the
    ``ceil((1 - alpha) * N)``-th smallest pooled distance.
    """
    d = np.asarray(distances, dtype=np.float64).ravel()
    if d.size == 0:
        raise EmptyInputError("critical_k needs at least one distance")
    q = required_count(check_alpha(alpha), d.size)
    return float(np.partition(d, q - 1)[q - 1])


def pooled_distances(samples, cfg, two_sided=False):
    """Per-sample minimal ``k`` within each bootstrap set, shape ``(B, m)``."""
    rows = _rows(samples, 2)
    m = rows.shape[0]
    if cfg.resample:
        idx = bootstrap_indices(m, cfg.seed, cfg.bootstrap_reps)
    else:
        idx = np.arange(m, dtype=np.int64)[None, :]
    return kernels.bootstrap_distances(rows, idx, cfg.ddof, two_sided)


def _band_from_k(grid, center, s_minus, s_plus, k, clip):
    with np.errstate(invalid="ignore"):
        lower = np.where(s_minus > 0, center - k * s_minus, center)
        upper = np.where(s_plus > 0, center + k * s_plus, center)
    if clip:
        lower = np.clip(lower, 0.0, 1.0)
        upper = np.clip(upper, 0.0, 1.0)
    return Band(grid, lower, upper)


def olshen_bands(samples, alphas, cfg, two_sided=False, clip=True):
    """Olshen bands for several ``alphas`` from one set of bootstrap draws."""
    samples = as_samples(samples)
    rows = _rows(samples, 2)
    pooled = np.sort(pooled_distances(samples, cfg, two_sided).ravel())
    center, s_minus, s_plus = kernels.center_spread(rows, cfg.ddof, two_sided)
    bands = []
    for alpha in alphas:
        k = pooled[required_count(check_alpha(alpha), pooled.size) - 1]
        bands.append(_band_from_k(samples.grid, center, s_minus, s_plus, k, clip))
    return bands


def olshen(samples, cfg, clip=True):
    """Symmetric band ``mean +/- k * std`` with bootstrap-calibrated ``k``.

    Examples
    --------
    >>> import numpy as np
    >>> band = olshen(np.arange(10) / 10, OlshenConfig(alpha=0.2, resample=False))
    >>> band.lower.round(12), band.upper.round(12)
    (array([0.1]), array([0.8]))
    """
    return olshen_bands(samples, [cfg.alpha], cfg, two_sided=False, clip=clip)[0]


def two_sided_olshen(samples, cfg, clip=True):
    """Asymmetric band ``[median - k * s_minus, median + k * s_plus]``."""
    return olshen_bands(samples, [cfg.alpha], cfg, two_sided=True, clip=clip)[0]


def gspie_split(m, cfg):
    """Seeded shuffle of ``range(m)`` into (optimization, validation) indices."""
    if m < 4:
        raise TooFewSamplesError(f"GSPIE needs at least 4 samples, got {m}")
    perm = substream(cfg.seed).permutation(m)
    n_opt = min(max(int(round(cfg.split_fraction * m)), 1), m - 1)
    return np.sort(perm[:n_opt]), np.sort(perm[n_opt:])


def gspie_step(band, opt_rows):
    """Best single retraction of ``band`` against the optimization rows.

    Each wall may move inwards to the nearest coordinate of a row still in
    the band.  Candidates are scored by width reduction per newly excluded
    row (infinite when nothing is excluded); ties go to lower walls first,
    then to the smallest time index.  Returns ``None`` when no wall can move.
    """
    rows = as_samples(opt_rows).rows
    if rows.shape[1] != band.n:
        raise DimensionMismatchError("optimization rows do not match the band grid")
    found = kernels.gspie_step_numpy(band.lower, band.upper, rows)
    if found is None:
        return None
    wall, t, new_value, reduction, excluded, score = found
    return GspieStep("lower" if wall == 0 else "upper", t, new_value, reduction, excluded, score)


def gspie_fit_multi(opt_rows, val_rows, alphas, grid=None, trace=None):
    """GSPIE on explicit partitions, one band per entry of ``alphas``.

    The box starts as the bounding box of both partitions.  ``trace``, if a
    list, receives every applied step (forces the numpy path).
    """
    opt = as_samples(opt_rows)
    val = as_samples(val_rows)
    if opt.n != val.n:
        raise DimensionMismatchError("optimization and validation rows differ in length")
    if opt.m < 1 or val.m < 1:
        raise TooFewSamplesError("both GSPIE partitions must be non-empty")
    grid = grid if grid is not None else opt.grid
    union = np.vstack([opt.rows, val.rows])
    lower0, upper0 = union.min(axis=0), union.max(axis=0)
    alphas = [check_alpha(a) for a in alphas]
    req = np.array([required_count(a, val.m) for a in alphas], dtype=np.int64)
    order = np.argsort(-req, kind="stable")
    if trace is not None:
        lowers, uppers, _ = kernels.gspie_search_numpy(
            opt.rows, val.rows, lower0, upper0, req[order], trace=trace)
    else:
        lowers, uppers, _ = kernels.gspie_search(opt.rows, val.rows, lower0, upper0, req[order])
    bands = [None] * len(alphas)
    for j, pos in enumerate(order):
        bands[pos] = Band(grid, lowers[j], uppers[j])
    return bands


def gspie_fit(opt_rows, val_rows, alpha, grid=None):
    return gspie_fit_multi(opt_rows, val_rows, [alpha], grid=grid)[0]


def gspie_bands(samples, alphas, cfg, clip=True):
    samples = as_samples(samples)
    opt_idx, val_idx = gspie_split(samples.m, cfg)
    bands = gspie_fit_multi(samples.rows[opt_idx], samples.rows[val_idx], alphas,
                            grid=samples.grid)
    if clip:
        bands = [Band(b.grid, np.clip(b.lower, 0, 1), np.clip(b.upper, 0, 1)) for b in bands]
    return bands


def gspie(samples, cfg, clip=True):
    """Greedy hill climbing over orthotopes, stopped on the validation split."""
    return gspie_bands(samples, [cfg.alpha], cfg, clip=clip)[0]


def ogive_quantile(sorted_values, p):
    """Percentile of the piecewise-linear empirical CDF.

    The CDF passes through ``(x_(i), i / (m + 1))``; probabilities outside
    ``[1/(m+1), m/(m+1)]`` clamp to the extreme order statistics.
    """
    x = np.asarray(sorted_values, dtype=np.float64)
    if x.size == 0:
        raise EmptyInputError("ogive_quantile needs at least one value")
    m = x.size
    nodes = np.arange(1, m + 1) / (m + 1)
    return float(np.interp(p, nodes, x))


def bonferroni_band(samples, alpha):
    """Pointwise ogive intervals at level ``1 - alpha / n`` per time point."""
    samples = as_samples(samples)
    rows = np.sort(_rows(samples, 2), axis=0)
    alpha = check_alpha(alpha)
    tail = alpha / (2 * samples.n)
    m = rows.shape[0]
    nodes = np.arange(1, m + 1) / (m + 1)
    lower = np.array([np.interp(tail, nodes, rows[:, t]) for t in range(samples.n)])
    upper = np.array([np.interp(1.0 - tail, nodes, rows[:, t]) for t in range(samples.n)])
    return Band(samples.grid, lower, upper)


def estimate_bands(method, samples, alphas, seed=0, bootstrap_reps=1000,
                   split_fraction=0.5, resample=True):
    """Dispatch by method name; one band per alpha, clipped to [0, 1]."""
    if method in ("olshen", "olshen2"):
        cfg = OlshenConfig(alphas[0], bootstrap_reps, seed, resample)
        return olshen_bands(samples, alphas, cfg, two_sided=method == "olshen2")
    if method == "gspie":
        return gspie_bands(samples, alphas, GspieConfig(alphas[0], split_fraction, seed))
    if method == "bonferroni":
        return [bonferroni_band(samples, a) for a in alphas]
    raise InvalidConfigError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")

"""Synthetic survival-curve distributions and bootstrap resampling.

Every random draw comes from a numpy ``PCG64`` stream keyed by
``SeedSequence(entropy=seed, spawn_key=keys)``.  Keys name the consumer
(trial index, bootstrap set index, ...), so output never depends on the
order or thread in which streams are consumed.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from .curves import SampleMatrix, TimeGrid, as_grid, as_samples
from .errors import EmptyMatrixError, InvalidConfigError

_LOGIT_EPS = 1e-12


def substream(seed, *keys):
    """Independent generator for ``(seed, *keys)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed, *keys):
    """64-bit integer seed for a named child stream."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class WeibullFamilyConfig:
    """Log-normal Weibull scale/shape; each sampled curve is ``exp(-(t/scale)**shape)``."""

    grid: TimeGrid
    scale_location: float = 0.0
    scale_spread: float = 0.0
    shape_location: float = 0.0
    shape_spread: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "grid", as_grid(self.grid))
        if self.scale_spread < 0 or self.shape_spread < 0:
            raise InvalidConfigError("Weibull spreads must be non-negative")
        if np.any(self.grid.times <= 0):
            raise InvalidConfigError("Weibull grid times must be positive")


@dataclass(frozen=True)
class LatentGaussianConfig:
    """A base curve perturbed on the logit scale by AR(1) Gaussian noise.

    ``correlation_decay`` sets the lag-one latent correlation to
    ``exp(-correlation_decay)``; zero gives a single shared shift per curve.
    """

    grid: TimeGrid
    base_curve: np.ndarray
    correlation_decay: float = 0.1
    noise_scale: float = 0.5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "grid", as_grid(self.grid))
        base = np.array(self.base_curve, dtype=np.float64)
        base.setflags(write=False)
        object.__setattr__(self, "base_curve", base)
        if base.shape != (len(self.grid),):
            raise InvalidConfigError("base curve length must match the grid")
        if np.any(base < 0) or np.any(base > 1) or np.any(np.diff(base) > 0):
            raise InvalidConfigError("base curve must be non-increasing within [0, 1]")
        if self.correlation_decay < 0 or self.noise_scale < 0:
            raise InvalidConfigError("correlation_decay and noise_scale must be non-negative")


def gen_weibull_curves(cfg, count):
    """Sample ``count`` Weibull survival curves on ``cfg.grid``."""
    count = int(count)
    if count < 1:
        raise InvalidConfigError("count must be at least 1")
    rng = substream(cfg.seed, 0)
    draws = rng.standard_normal((count, 2))
    scale = np.exp(cfg.scale_location + cfg.scale_spread * draws[:, 0])
    shape = np.exp(cfg.shape_location + cfg.shape_spread * draws[:, 1])
    t = cfg.grid.times
    rows = np.exp(-((t[None, :] / scale[:, None]) ** shape[:, None]))
    return SampleMatrix(cfg.grid, rows, survival=True)


def gen_latent_gaussian_curves(cfg, count):
    """Sample ``count`` curves around ``cfg.base_curve``.

    Each curve is ``sort_desc(expit(logit(base) + noise))`` where ``noise``
    is a stationary AR(1) sequence with marginal scale ``noise_scale``.
    Sorting keeps every row inside survival space.
    """
    count = int(count)
    if count < 1:
        raise InvalidConfigError("count must be at least 1")
    base = cfg.base_curve
    n = base.size
    if cfg.noise_scale == 0:
        return SampleMatrix(cfg.grid, np.tile(base, (count, 1)), survival=True)
    rng = substream(cfg.seed, 0)
    eps = rng.standard_normal((count, n))
    phi = np.exp(-cfg.correlation_decay)
    innov = np.sqrt(1.0 - phi * phi)
    noise = np.empty_like(eps)
    noise[:, 0] = eps[:, 0]
    for t in range(1, n):
        noise[:, t] = phi * noise[:, t - 1] + innov * eps[:, t]
    latent = logit(np.clip(base, _LOGIT_EPS, 1 - _LOGIT_EPS)) + cfg.noise_scale * noise
    rows = -np.sort(-expit(latent), axis=1)
    return SampleMatrix(cfg.grid, rows, survival=True)


def bootstrap_indices(m, seed, count_sets):
    """Row indices for ``count_sets`` resamples of size ``m``; set ``b`` uses stream ``(seed, b)``."""
    m = int(m)
    if m < 1:
        raise EmptyMatrixError("cannot bootstrap an empty sample matrix")
    idx = np.empty((int(count_sets), m), dtype=np.int64)
    for b in range(idx.shape[0]):
        idx[b] = substream(seed, b).integers(0, m, size=m)
    return idx


def bootstrap_rows(samples, seed, count_sets):
    """Resample rows with replacement into ``count_sets`` sets of the original size."""
    samples = as_samples(samples)
    if samples.m == 0:
        raise EmptyMatrixError("cannot bootstrap an empty sample matrix")
    idx = bootstrap_indices(samples.m, seed, count_sets)
    return [samples.take(row) for row in idx]


def default_base_curve(grid, median_time=None, shape=1.3):
    """Weibull survival curve through ``S(median_time) = 0.5``; a convenient base."""
    grid = as_grid(grid)
    t = grid.times
    if median_time is None:
        median_time = 0.5 * (t[0] + t[-1])
    scale = median_time / np.log(2.0) ** (1.0 / shape)
    return np.exp(-((t / scale) ** shape))


def default_latent_gaussian(n_times=32, horizon=60.0, correlation_decay=0.002,
                            noise_scale=0.5, seed=0):
    """Strongly correlated latent-Gaussian truth used by the calibration runs."""
    grid = TimeGrid(horizon * np.arange(1, n_times + 1) / n_times)
    return LatentGaussianConfig(grid, default_base_curve(grid), correlation_decay,
                                noise_scale, seed)


def default_weibull(n_times=32, horizon=60.0, median_scale=24.0, scale_spread=0.3,
                    median_shape=1.2, shape_spread=0.2, seed=0):
    """Weibull family with log-normal scale and shape around the given medians."""
    grid = TimeGrid(horizon * np.arange(1, n_times + 1) / n_times)
    return WeibullFamilyConfig(grid, float(np.log(median_scale)), scale_spread,
                               float(np.log(median_shape)), shape_spread, seed)

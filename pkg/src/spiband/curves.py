"""Time grids, sample matrices, bands, and the projection into survival space."""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    DimensionMismatchError,
    EmptyMatrixError,
    InvalidConfigError,
    NonIncreasingGridError,
    NotMonotoneError,
    OutOfRangeError,
    RaggedRowsError,
    SpibandError,
)

MONOTONE_TOL = 1e-9


def _frozen(a, dtype=np.float64):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing evaluation times ``t_1 < ... < t_n``."""

    times: np.ndarray

    def __post_init__(self):
        times = _frozen(self.times)
        if times.ndim != 1 or times.size == 0:
            raise NonIncreasingGridError("time grid must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(times)):
            raise NonIncreasingGridError("time grid must be finite")
        if np.any(np.diff(times) <= 0):
            raise NonIncreasingGridError("time grid must be strictly increasing")
        object.__setattr__(self, "times", times)

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        return isinstance(other, TimeGrid) and np.array_equal(self.times, other.times)

    def __hash__(self):
        return hash(self.times.tobytes())

    @classmethod
    def default(cls, n):
        return cls(np.arange(1, n + 1, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    """``m`` sampled curves evaluated on ``grid``; one curve per row."""

    grid: TimeGrid
    rows: np.ndarray
    survival: bool = False

    def __post_init__(self):
        rows = _frozen(self.rows)
        if rows.ndim != 2 or rows.shape[1] != len(self.grid):
            raise RaggedRowsError(
                f"rows must form an m x {len(self.grid)} matrix, got shape {rows.shape}")
        object.__setattr__(self, "rows", rows)

    @property
    def m(self):
        return self.rows.shape[0]

    @property
    def n(self):
        return self.rows.shape[1]

    def take(self, index):
        return SampleMatrix(self.grid, self.rows[np.asarray(index)], self.survival)


@dataclass(frozen=True, eq=False)
class Band:
    """Axis-aligned box ``prod_t [lower[t], upper[t]]`` over a time grid."""

    grid: TimeGrid
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _frozen(self.lower)
        upper = _frozen(self.upper)
        n = len(self.grid)
        if lower.shape != (n,) or upper.shape != (n,):
            raise DimensionMismatchError(
                f"band bounds must have length {n}, got {lower.shape} and {upper.shape}")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise SpibandError("band bounds must not be NaN")
        if np.any(lower > upper):
            raise SpibandError("band requires lower <= upper at every time point")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self):
        return self.lower.size

    @property
    def width(self):
        return self.upper - self.lower

    def __eq__(self, other):
        return (isinstance(other, Band) and self.grid == other.grid
                and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))

    __hash__ = None


def check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidConfigError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha


def as_grid(grid, n=None):
    if isinstance(grid, TimeGrid):
        return grid
    if grid is None:
        return TimeGrid.default(n)
    return TimeGrid(grid)


def validate_matrix(rows, grid, survival=False):
    """Check raw rows against ``grid`` and return a :class:`SampleMatrix`.

    Parameters
    ----------
    rows : sequence of sequences
        One curve per row, values are survival probabilities.
    grid : TimeGrid or sequence of float
    survival : bool
        Also require every row to be non-increasing (within 1e-9).

    Raises
    ------
    RaggedRowsError, OutOfRangeError, NotMonotoneError
    """
    grid = as_grid(grid)
    n = len(grid)
    if isinstance(rows, np.ndarray):
        if rows.ndim != 2 or rows.shape[1] != n:
            raise RaggedRowsError(f"expected rows of length {n}, got shape {rows.shape}")
        arr = rows.astype(np.float64)
    else:
        rows = list(rows)
        for i, r in enumerate(rows):
            if len(r) != n:
                raise RaggedRowsError(f"row {i} has length {len(r)}, expected {n}")
        arr = np.array(rows, dtype=np.float64).reshape(len(rows), n)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        bad = np.argwhere(~((arr >= 0.0) & (arr <= 1.0)))[0]
        raise OutOfRangeError(
            f"entry ({bad[0]}, {bad[1]}) = {arr[bad[0], bad[1]]!r} is outside [0, 1]")
    if survival and n > 1:
        rises = np.diff(arr, axis=1) > MONOTONE_TOL
        if np.any(rises):
            i, t = np.argwhere(rises)[0]
            raise NotMonotoneError(f"row {i} increases between time index {t} and {t + 1}")
    return SampleMatrix(grid, arr, survival)


def as_samples(samples):
    """Accept a SampleMatrix or a bare 2-D array (wrapped on a default grid)."""
    if isinstance(samples, SampleMatrix):
        return samples
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return SampleMatrix(TimeGrid.default(arr.shape[1]), arr)


def contains(band, sample):
    """True iff ``lower[t] <= sample[t] <= upper[t]`` for every t."""
    sample = np.asarray(sample, dtype=np.float64)
    if sample.shape != band.lower.shape:
        raise DimensionMismatchError(
            f"sample has shape {sample.shape}, band has {band.lower.shape}")
    return bool(np.all((band.lower <= sample) & (sample <= band.upper)))


def bounding_band(samples):
    """Smallest band containing every row."""
    samples = as_samples(samples)
    if samples.m == 0:
        raise EmptyMatrixError("bounding band of an empty sample matrix")
    return Band(samples.grid, samples.rows.min(axis=0), samples.rows.max(axis=0))


def pava_antitonic(v):
    """Least-squares projection of ``v`` onto non-increasing vectors."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError("pava_antitonic expects a 1-D vector")
    if v.size == 0:
        return v.copy()
    return kernels.pava_antitonic(v)


def project_band(band):
    """Project both walls into survival space and clip them to [0, 1].

    PAVA is order preserving, so ``lower <= upper`` survives the projection.
    """
    lower = np.clip(pava_antitonic(band.lower), 0.0, 1.0)
    upper = np.clip(pava_antitonic(band.upper), 0.0, 1.0)
    # block means of the two walls can disagree in the last ulp
    return Band(band.grid, np.minimum(lower, upper), upper)


def clip_band(band):
    return Band(band.grid, np.clip(band.lower, 0.0, 1.0), np.clip(band.upper, 0.0, 1.0))

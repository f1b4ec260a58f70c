import numpy as np
import pytest

from spiband.curves import TimeGrid
from spiband.errors import EmptyMatrixError, InvalidConfigError
from spiband.synth import (
    LatentGaussianConfig,
    WeibullFamilyConfig,
    bootstrap_indices,
    bootstrap_rows,
    default_base_curve,
    default_latent_gaussian,
    default_weibull,
    gen_latent_gaussian_curves,
    gen_weibull_curves,
    substream,
)

GRID = TimeGrid([1.0, 2.0, 5.0, 10.0])


def test_weibull_fixed_parameters_are_exact():
    cfg = WeibullFamilyConfig(GRID, scale_location=np.log(5.0), shape_location=0.0)
    rows = gen_weibull_curves(cfg, 3).rows
    np.testing.assert_allclose(rows, np.tile(np.exp(-GRID.times / 5.0), (3, 1)), rtol=1e-15)


def test_weibull_rows_are_survival_curves():
    rows = gen_weibull_curves(default_weibull(seed=4), 200).rows
    assert rows.min() >= 0 and rows.max() <= 1
    assert np.all(np.diff(rows, axis=1) <= 0)


def test_latent_zero_noise_returns_base():
    base = default_base_curve(GRID)
    cfg = LatentGaussianConfig(GRID, base, noise_scale=0.0)
    np.testing.assert_array_equal(gen_latent_gaussian_curves(cfg, 4).rows, np.tile(base, (4, 1)))


def test_latent_rows_are_survival_curves():
    rows = gen_latent_gaussian_curves(default_latent_gaussian(seed=2), 300).rows
    assert np.all(np.diff(rows, axis=1) <= 0)
    assert rows.min() >= 0 and rows.max() <= 1


def test_latent_median_tracks_base():
    cfg = default_latent_gaussian(seed=9)
    rows = gen_latent_gaussian_curves(cfg, 4000).rows
    np.testing.assert_allclose(np.median(rows, axis=0), cfg.base_curve, atol=0.03)


def test_base_curve_median():
    grid = TimeGrid([10.0, 20.0, 30.0])
    assert default_base_curve(grid, median_time=20.0)[1] == pytest.approx(0.5)


@pytest.mark.parametrize("make", [
    lambda: WeibullFamilyConfig(GRID, scale_spread=-1.0),
    lambda: WeibullFamilyConfig(TimeGrid([0.0, 1.0])),
    lambda: LatentGaussianConfig(GRID, [0.9, 0.8]),
    lambda: LatentGaussianConfig(GRID, [0.5, 0.6, 0.4, 0.3]),
    lambda: LatentGaussianConfig(GRID, [0.9, 0.8, 0.7, 0.6], noise_scale=-1),
])
def test_invalid_configs(make):
    with pytest.raises(InvalidConfigError):
        make()


def test_count_must_be_positive():
    with pytest.raises(InvalidConfigError):
        gen_weibull_curves(default_weibull(), 0)


def test_generators_deterministic():
    a = gen_latent_gaussian_curves(default_latent_gaussian(seed=1), 50).rows
    b = gen_latent_gaussian_curves(default_latent_gaussian(seed=1), 50).rows
    c = gen_latent_gaussian_curves(default_latent_gaussian(seed=2), 50).rows
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_bootstrap_sets_are_independent_of_count():
    # set b is keyed by (seed, b), so asking for more sets keeps the prefix
    short = bootstrap_indices(20, 7, 3)
    long = bootstrap_indices(20, 7, 10)
    np.testing.assert_array_equal(short, long[:3])
    assert short.min() >= 0 and short.max() < 20


def test_bootstrap_rows():
    cfg = default_weibull(n_times=4)
    samples = gen_weibull_curves(cfg, 6)
    sets = bootstrap_rows(samples, 0, 5)
    assert len(sets) == 5 and all(s.m == 6 and s.grid == samples.grid for s in sets)
    originals = {tuple(r) for r in samples.rows}
    assert all(tuple(r) in originals for s in sets for r in s.rows)


def test_bootstrap_empty():
    with pytest.raises(EmptyMatrixError):
        bootstrap_indices(0, 0, 2)


def test_substreams_differ():
    assert substream(1, 0).random() != substream(1, 1).random()
    assert substream(1, 0).random() == substream(1, 0).random()

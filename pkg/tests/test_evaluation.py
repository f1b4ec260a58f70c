import math

import numpy as np
import pytest

from spiband.curves import Band, TimeGrid
from spiband.errors import DimensionMismatchError, InvalidConfigError, ZeroBaselineError
from spiband.evaluation import (
    ExperimentReport,
    average_width,
    calibration_experiment,
    coverage_report,
    discretization_sweep,
    observed_coverage,
    percent_change,
    sweep_grid,
    tightness_experiment,
)
from spiband.synth import default_latent_gaussian, default_weibull


def band(lo, hi):
    return Band(TimeGrid.default(len(lo)), lo, hi)


def test_full_cube_covers_everything(rng):
    assert observed_coverage(band([0, 0], [1, 1]), rng.random((50, 2))) == 1.0


def test_boundary_counts_as_covered():
    assert observed_coverage(band([0.2], [0.4]), np.array([[0.2], [0.4], [0.5]])) == 2 / 3


def test_coverage_errors():
    with pytest.raises(InvalidConfigError):
        observed_coverage(band([0.2], [0.4]), np.empty((0, 1)))
    with pytest.raises(DimensionMismatchError):
        observed_coverage(band([0.2], [0.4]), np.zeros((3, 2)))


def test_average_width():
    assert average_width(band([0.1, 0.2], [0.5, 0.4])) == pytest.approx(0.3)


def test_percent_change():
    assert percent_change(0.8, 1.0) == pytest.approx(-20.0)
    assert percent_change(0.0, 0.0) == 0.0
    with pytest.raises(ZeroBaselineError):
        percent_change(0.1, 0.0)


def test_coverage_report():
    r = coverage_report(band([0.0], [0.5]), np.array([[0.1], [0.9]]), band([0.0], [1.0]))
    assert (r.observed_coverage, r.covered_count, r.n_test_samples) == (0.5, 1, 2)
    assert r.percent_change_vs_baseline == pytest.approx(-50.0)
    assert r.to_dict()["average_width"] == 0.5


def test_aggregate():
    rep = ExperimentReport()
    rep.add(0, "olshen", 0.05, 4, 0.9, 0.2, -10)
    rep.add(1, "olshen", 0.05, 4, 1.0, 0.4, -30)
    row = rep.lookup("olshen", 0.05)
    assert row["mean_coverage"] == pytest.approx(0.95)
    assert row["mean_width"] == pytest.approx(0.3)
    assert row["mean_percent_change"] == pytest.approx(-20)
    half = 1.96 * np.std([0.2, 0.4], ddof=1) / math.sqrt(2)
    assert row["width_ci_low"] == pytest.approx(0.3 - half)
    with pytest.raises(KeyError):
        rep.lookup("gspie")


def test_calibration_small_run_is_deterministic():
    gen = default_latent_gaussian(n_times=6)
    kw = dict(est_samples=60, test_samples=200, seed=3, bootstrap_reps=20)
    a = calibration_experiment(gen, ["olshen", "gspie", "bonferroni"], [0.1, 0.2], 2, **kw)
    b = calibration_experiment(gen, ["olshen", "gspie", "bonferroni"], [0.1, 0.2], 2, **kw)
    assert a.rows == b.rows
    assert len(a.rows) == 2 * 3 * 2
    for row in a.rows:
        if row["method"] == "bonferroni":
            assert row["percent_change"] == 0.0
        assert 0.0 <= row["observed_coverage"] <= 1.0


def test_trials_are_order_independent():
    gen = default_latent_gaussian(n_times=4)
    kw = dict(est_samples=40, test_samples=50, seed=1, bootstrap_reps=10)
    two = calibration_experiment(gen, ["olshen"], [0.1], 2, **kw)
    one = calibration_experiment(gen, ["olshen"], [0.1], 1, **kw)
    assert two.rows[0] == one.rows[0]


def test_tightness_has_no_coverage():
    rep = tightness_experiment(default_latent_gaussian(n_times=5), ["olshen2"], 0.05, 1,
                               est_samples=50, bootstrap_reps=10)
    assert math.isnan(rep.rows[0]["observed_coverage"])


def test_sweep_grid():
    np.testing.assert_allclose(sweep_grid(60.0, 4).times, [15, 30, 45, 60])


def test_sweep_runs_each_size():
    rep = discretization_sweep(default_weibull(), ["olshen", "gspie"], 0.1, [4, 8], 1,
                               est_samples=40, bootstrap_reps=10)
    assert sorted({r["grid_size"] for r in rep.rows}) == [4, 8]


@pytest.mark.parametrize("kwargs", [dict(trials=0), dict(methods=["nope"])])
def test_calibration_rejects_bad_args(kwargs):
    args = dict(generator=default_latent_gaussian(n_times=4), methods=["olshen"],
                alphas=[0.1], trials=1)
    args.update(kwargs)
    with pytest.raises(InvalidConfigError):
        calibration_experiment(**args)


def test_sweep_rejects_tiny_grids():
    with pytest.raises(InvalidConfigError):
        discretization_sweep(default_weibull(), ["olshen"], 0.1, [1], 1)

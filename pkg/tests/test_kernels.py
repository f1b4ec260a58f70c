"""The numba and numpy backends must agree on every kernel."""
import numpy as np
import pytest

from spiband import kernels
from spiband.synth import bootstrap_indices

needs_numba = pytest.mark.skipif(not kernels.NUMBA_AVAILABLE, reason="numba not installed")


@needs_numba
@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_pava_backends_agree(rng, n):
    for _ in range(100):
        v = rng.normal(size=n)
        np.testing.assert_array_equal(kernels.pava_antitonic_numba(v),
                                      kernels.pava_antitonic_numpy(v))


@needs_numba
@pytest.mark.parametrize("two_sided", [False, True])
@pytest.mark.parametrize("ddof", [0, 1])
def test_bootstrap_backends_agree(rng, two_sided, ddof):
    for trial in range(20):
        m, n = rng.integers(2, 40), rng.integers(1, 6)
        rows = rng.random((m, n))
        if trial % 4 == 0:
            rows[:, 0] = 0.3  # constant column
        if trial % 5 == 0:
            rows = np.round(rows, 1)  # ties at the median
        idx = bootstrap_indices(m, trial, 15)
        a = kernels.bootstrap_distances_numba(rows, idx, ddof, two_sided)
        b = kernels.bootstrap_distances_numpy(rows, idx, ddof, two_sided)
        finite = np.isfinite(b)
        np.testing.assert_array_equal(np.isfinite(a), finite)
        np.testing.assert_allclose(a[finite], b[finite], rtol=1e-12, atol=1e-12)


@needs_numba
def test_gspie_search_backends_agree(rng):
    for trial in range(200):
        n = int(rng.integers(1, 5))
        m_opt, m_val = int(rng.integers(1, 25)), int(rng.integers(1, 25))
        rows = rng.random((m_opt + m_val, n))
        if trial % 3 == 0:
            rows = np.round(rows, 1)
        opt, val = rows[:m_opt], rows[m_opt:]
        lo, hi = rows.min(axis=0), rows.max(axis=0)
        req = np.sort(rng.integers(0, m_val + 1, size=3))[::-1].copy()
        a = kernels.gspie_search_numba(opt, val, lo, hi, req)
        b = kernels.gspie_search_numpy(opt, val, lo, hi, req)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)


def test_center_spread_two_sided_even_median():
    x = np.array([[0.0], [0.0], [0.0], [1.0]])
    c, sm, sp = kernels.center_spread(x, 0, True)
    assert c[0] == 0.0 and sm[0] == 0.0 and sp[0] == 0.5


def test_backend_name_matches_flag():
    assert kernels.BACKEND == ("numba" if kernels.USE_NUMBA else "numpy")


def test_disable_flag_selects_numpy(tmp_path):
    import os
    import subprocess
    import sys
    env = dict(os.environ, SPIBAND_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "import spiband.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"

"""Time the numba kernels against their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --repeat 5 --output bench.json

Both variants are imported directly, so the SPIBAND_DISABLE_NUMBA flag
does not matter here.  Outputs are checked for agreement before timing.
"""
import argparse
import json
import sys
import time

import numpy as np

from spiband import kernels
from spiband.synth import bootstrap_indices, default_latent_gaussian, gen_latent_gaussian_curves


def best_of(fn, repeat):
    fn()  # warm-up, also triggers JIT compilation
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(m, n, reps):
    rows = gen_latent_gaussian_curves(default_latent_gaussian(n_times=n, seed=1), m).rows
    idx = bootstrap_indices(m, 0, reps)
    half = m // 2
    lo, hi = rows.min(axis=0), rows.max(axis=0)
    req = np.array([int(np.ceil(0.95 * (m - half)))])
    pava_in = np.random.default_rng(0).normal(size=(200, n))
    return {
        f"bootstrap one-sided  m={m} n={n} B={reps}": (
            lambda: kernels.bootstrap_distances_numba(rows, idx, 0, False),
            lambda: kernels.bootstrap_distances_numpy(rows, idx, 0, False)),
        f"bootstrap two-sided  m={m} n={n} B={reps}": (
            lambda: kernels.bootstrap_distances_numba(rows, idx, 0, True),
            lambda: kernels.bootstrap_distances_numpy(rows, idx, 0, True)),
        f"gspie search         m={m} n={n}": (
            lambda: kernels.gspie_search_numba(rows[:half], rows[half:], lo, hi, req),
            lambda: kernels.gspie_search_numpy(rows[:half], rows[half:], lo, hi, req)),
        f"pava x200            n={n}": (
            lambda: [kernels.pava_antitonic_numba(v) for v in pava_in],
            lambda: [kernels.pava_antitonic_numpy(v) for v in pava_in]),
    }


def agree(a, b):
    if isinstance(a, tuple):
        return all(agree(x, y) for x, y in zip(a, b))
    if isinstance(a, list):
        return all(np.allclose(x, y, rtol=1e-12, atol=1e-12) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-12)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=1000)
    parser.add_argument("--times", type=int, nargs="+", default=[32, 128])
    parser.add_argument("--reps", type=int, default=200, help="bootstrap sets")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--output", default=None)
    args = parser.parse_args(argv)

    if not kernels.NUMBA_AVAILABLE:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1

    results = []
    print(f"{'kernel':42s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for n in args.times:
        for name, (fast, slow) in cases(args.samples, n, args.reps).items():
            if not agree(fast(), slow()):
                print(f"{name}: backends disagree", file=sys.stderr)
                return 1
            t_fast, t_slow = best_of(fast, args.repeat), best_of(slow, args.repeat)
            results.append({"kernel": name.split("  ")[0].strip(), "case": name,
                            "numba_s": t_fast, "numpy_s": t_slow})
            print(f"{name:42s} {t_fast:10.4f} {t_slow:10.4f} {t_slow / t_fast:7.1f}x")
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(results, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())

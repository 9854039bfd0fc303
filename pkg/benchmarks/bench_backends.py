"""Benchmark the compiled kernels against the pure-Python fallback.

Both backends are bit-identical on the same inputs (asserted here); the
point of the extension is the speed gap this script measures.

Usage: python benchmarks/bench_backends.py [--trials N]
"""

import argparse
import time

import numpy as np

from ris_street.backend import available_backends
from ris_street.coverage import mc_mean_covered_length
from ris_street.sinr import (RadioParams, mc_coverage_h0_curve,
                             mc_coverage_dependent_curve, radio_constants)
from ris_street.street import ExpoEnvParams, StreetGeometry


def time_call(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=3000,
                        help="trial count per benchmark (default 3000)")
    args = parser.parse_args()
    n = args.trials

    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend not built; nothing to compare")
        return

    env = ExpoEnvParams(0.5, 0.5)
    geo = StreetGeometry.from_rho(20.0)
    radio = RadioParams(20.0, 20.0, -90.0, -90.0, 100, 0.2)
    consts = radio_constants(radio, geo)
    thetas = [0.1, 1.0, 25.0]

    cases = {
        "covered-length MC": lambda k: mc_mean_covered_length(
            env, geo, n, seed=1, kernels=k),
        "independent-marks coverage MC": lambda k: mc_coverage_h0_curve(
            10.0, thetas, radio, consts, env, geo, n, seed=1, kernels=k),
        "dependent coverage MC": lambda k: mc_coverage_dependent_curve(
            10.0, thetas, radio, consts, env, geo, n, seed=1, kernels=k),
    }

    print(f"{n} trials per case\n")
    print(f"{'case':<32}{'cython':>10}{'python':>10}{'speedup':>9}")
    for name, runner in cases.items():
        out_cy, t_cy = time_call(lambda: runner(backends["cython"]))
        out_py, t_py = time_call(lambda: runner(backends["python"]))
        assert repr(out_cy) == repr(out_py), f"{name}: backends disagree"
        print(f"{name:<32}{t_cy:>9.3f}s{t_py:>9.3f}s{t_py / t_cy:>8.1f}x")
    print("\nresults bit-identical across backends")


if __name__ == "__main__":
    main()

"""Built-in oracle suite: cross-checks every closed form against an
independent numerical route.

Run via `ris-street selftest`; every check prints one line and the command
exits non-zero if any fails.  Checks are deterministic (fixed seed).
"""

from __future__ import annotations

import math

import numpy as np

from . import mean_length
from .numerics import QuadratureConfig, SeriesConfig, integrate, kummer_m
from .street import ExpoEnvParams, StreetGeometry


class SelfTestFailure(RuntimeError):
    pass


def _kummer_integral(a: int, b: int, z: float) -> float:
    """Integral representation of M(a,b,z), used only as an oracle.

    The integral can be as small as e^{z}, so error control must be purely
    relative (a fixed absolute tolerance would swamp it).
    """
    quad = QuadratureConfig(rel_tol=1e-11, abs_tol=1e-300)
    log_pref = math.lgamma(b) - math.lgamma(a) - math.lgamma(b - a)
    val = integrate(lambda t: math.exp(z * t + (a - 1) * math.log(t)
                                       + (b - a - 1) * math.log(1.0 - t))
                    if 0.0 < t < 1.0 else 0.0,
                    0.0, 1.0, quad)
    return math.exp(log_pref) * val


def run_selftest(report=print) -> bool:
    """Execute all oracle checks; returns True when everything passed."""
    quad = QuadratureConfig()
    ok = True

    def check(name: str, passed: bool, detail: str = "") -> None:
        nonlocal ok
        report(f"[{'PASS' if passed else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
        ok = ok and passed

    # series vs integral representation of the Kummer function
    rng = np.random.default_rng(20240501)
    worst = 0.0
    for _ in range(40):
        i = int(rng.integers(1, 21))
        z = float(rng.uniform(-50.0, 50.0))
        series_val = kummer_m(i, 2 * i, z)
        integral_val = _kummer_integral(i, 2 * i, z)
        worst = max(worst, abs(series_val - integral_val) / abs(integral_val))
    check("kummer series vs integral representation (40 draws)", worst < 1e-8,
          f"worst rel {worst:.2e}")
    check("kummer at z=0 is exactly 1",
          all(kummer_m(i, 2 * i, 0.0) == 1.0 for i in range(1, 21)))

    # scenario closed forms vs quadrature
    try:
        mean_length._closed_forms_verified = False
        mean_length.verify_closed_forms()
        check("gap-mean closed forms vs quadrature", True)
    except AssertionError as exc:
        check("gap-mean closed forms vs quadrature", False, str(exc))
    finally:
        mean_length._closed_forms_verified = False

    # spot checks through the module attributes (so monkeypatched forms are seen)
    oracle = integrate(lambda v: (v - 1.0) * 0.5 * math.exp(-0.5 * v), 1.0, 200.0, quad)
    got = mean_length.gap_mean_scenario1(19.0, 0.5, 20.0, 0.0)
    check("scenario-1 mean at (gamma1=0.5, rho=20, t=19)",
          abs(got - oracle) <= 1e-9 * abs(oracle), f"{got} vs {oracle}")
    oracle = integrate(lambda v: v * math.exp(-v), 1.0, 200.0, quad)
    got = mean_length.gap_mean_scenario2(0.0, 1.0, 0.5, 0.5)
    check("scenario-2 mean at (gamma1=1, u=1)",
          abs(got - oracle) <= 1e-9 * abs(oracle), f"{got} vs {oracle}")
    oracle = integrate(lambda v: (20.0 * v - 3.0) / 19.0 * 0.5 * math.exp(-0.5 * v),
                       3.0 / 20.0, 3.0, quad)
    got = mean_length.gap_mean_scenario3(0.0, 0.5, 20.0, 1.0, 2.0)
    check("scenario-3 mean at (gamma1=0.5, rho=20, u=3)",
          abs(got - oracle) <= 1e-9 * abs(oracle), f"{got} vs {oracle}")

    # change-of-variable identity inside the coverage-probability exponent
    from .numerics import integrate_semi_infinite
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        k = float(rng.uniform(10.0, 500.0))
        beta = float(rng.uniform(0.1, 5000.0))
        decay = float(rng.uniform(1e-3, 2.0))
        root = math.sqrt(k + beta)
        lhs = beta / root * integrate_semi_infinite(
            lambda y: math.exp(-decay * root * y) / (1.0 + y * y), quad)
        rhs = integrate_semi_infinite(
            lambda y: beta / (k + beta + y * y) * math.exp(-decay * y), quad)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    check("coverage exponent change-of-variable identity (100 draws)",
          worst < 1e-10, f"worst rel {worst:.2e}")

    # series route vs closed form on a small random grid
    rng = np.random.default_rng(99)
    series_cfg = SeriesConfig(i_max=2000)
    worst = 0.0
    try:
        for _ in range(5):
            rho = float(rng.uniform(3.0, 40.0))
            g1 = float(rng.uniform(0.2, 2.0))
            g2 = float(rng.uniform(0.2, 2.0))
            a = float(rng.uniform(0.0, 2.0 * (rho - 1.0) / g1 * 0.2))
            delta = float(rng.uniform(0.0, 3.0))
            params = ExpoEnvParams(g1, g2)
            geo = StreetGeometry.from_rho(rho, a=a, delta=delta)
            v1 = mean_length.mean_covered_length_series(params, geo, quad, series_cfg).total
            v2 = mean_length.mean_covered_length_closed_form(params, geo, quad, series_cfg).total
            worst = max(worst, abs(v1 - v2) / abs(v2))
        check("series route vs closed form (5 random parameter points)",
              worst < 1e-6, f"worst rel {worst:.2e}")
    except AssertionError as exc:
        check("series route vs closed form (5 random parameter points)",
              False, str(exc))

    # the two algebraic forms of the correction-free approximation
    rng = np.random.default_rng(123)
    worst = 0.0
    for _ in range(200):
        rho = 1.0 + float(10 ** rng.uniform(-2, 3))
        g1 = float(10 ** rng.uniform(-2, 2))
        alpha = float(10 ** rng.uniform(-3, 3))
        params = ExpoEnvParams(g1, alpha * g1)
        geo = StreetGeometry.from_rho(rho)
        direct = 1.0 / (g1 * mean_length.one_minus_geometric_ratio(params, rho))
        other = mean_length.mean_covered_length_approx_alpha_form(params, geo)
        worst = max(worst, abs(direct - other) / abs(direct))
    check("approximation algebraic identity (200 draws)", worst < 1e-13,
          f"worst rel {worst:.2e}")

    # coverage closed form: internal two-form identity must hold
    from .sinr import (RadioParams, SinrQuery, coverage_probability_analytic,
                       radio_constants)
    try:
        radio = RadioParams(20.0, 20.0, -90.0, -90.0, 100, 0.2)
        geo = StreetGeometry.from_rho(20.0)
        env = ExpoEnvParams(0.5, 0.5)
        consts = radio_constants(radio, geo)
        for theta in (0.1, 1.0, 25.0):
            q = SinrQuery.build(10.0, theta, consts, geo.a)
            p = coverage_probability_analytic(q, radio, consts, env, geo)
            if not 0.0 <= p <= 1.0:
                raise AssertionError(f"probability {p} outside [0, 1]")
        check("coverage probability closed form (both integral forms)", True)
    except AssertionError as exc:
        check("coverage probability closed form (both integral forms)", False, str(exc))

    return ok

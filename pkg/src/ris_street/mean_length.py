"""Analytic mean covered length for exponential free/obstacle laws.

Three routes to the same quantity:

* mean_covered_length_series integrates the per-gap conditional means
  against the obstacle-end densities, gap index by gap index;
* mean_covered_length_closed_form evaluates the equivalent closed form:
  a geometric leading term exp(gamma1 a/(rho-1)) / (gamma1 (1-r)) minus a
  rapidly converging sum of finite-interval corrections;
* mean_covered_length_approx drops the corrections (valid for
  gamma1 * a << rho - 1) and also exposes the alpha = gamma2/gamma1 rewrite.

The closed-form inner expectations are verified against quadrature oracles
once per process before first use, so a derivation slip cannot silently
propagate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import numerics
from .numerics import QuadratureConfig, SeriesConfig, integrate, integrate_semi_infinite
from .street import ExpoEnvParams, StreetGeometry, density_f_i

__all__ = [
    "MeanLengthBreakdown",
    "SeriesConvergenceError",
    "geometric_ratio",
    "one_minus_geometric_ratio",
    "gap_mean_scenario1",
    "gap_mean_scenario2",
    "gap_mean_scenario3",
    "gap0_term",
    "gap0_convention_offset",
    "mean_covered_length_series",
    "mean_covered_length_closed_form",
    "mean_covered_length_approx",
    "mean_covered_length_approx_alpha_form",
    "verify_closed_forms",
]


class SeriesConvergenceError(RuntimeError):
    """The gap-index sum did not converge within i_max terms."""

    def __init__(self, message: str, partial: float, terms: int):
        super().__init__(message)
        self.partial = partial
        self.terms = terms


@dataclass(frozen=True)
class MeanLengthBreakdown:
    """Mean covered length with its leading term and per-index corrections.

    total = leading_term - sum of (A_i + B_i + C_i) over per_i_corrections.
    """

    total: float
    leading_term: float
    per_i_corrections: tuple[tuple[int, float, float, float], ...]
    truncation_index: int
    r: float

    def __post_init__(self):
        if not (0.0 < self.r < 1.0):
            raise ValueError(f"geometric ratio must be in (0, 1), got {self.r}")


def one_minus_geometric_ratio(params: ExpoEnvParams, rho: float) -> float:
    """1 - r evaluated in a cancellation-free form.

    r = 1 / ((1 + 1/(rho-1)) (1 + gamma1/(gamma2 (rho-1)))) simplifies to
    1 - r = (gamma2 (rho-1) + rho gamma1) / (rho (gamma2 (rho-1) + gamma1)),
    which stays accurate when r is close to 1.
    """
    g1, g2 = params.gamma1, params.gamma2
    return (g2 * (rho - 1.0) + rho * g1) / (rho * (g2 * (rho - 1.0) + g1))


def geometric_ratio(params: ExpoEnvParams, rho: float) -> float:
    """Per-gap decay ratio r of the covered-length contributions."""
    return 1.0 - one_minus_geometric_ratio(params, rho)


def gap_mean_scenario1(t: float, gamma1: float, rho: float, a: float) -> float:
    """Mean covered share of a gap whose left obstacle ends at t >= a:
    E[(U - (t-a)/(rho-1))^+] for exponential U."""
    return math.exp(-gamma1 * (t - a) / (rho - 1.0)) / gamma1


def gap_mean_scenario2(t: float, gamma1: float, a: float, delta: float) -> float:
    """Mean covered share of a gap fully covered when it reaches past the
    segment end: E[U 1{U > a + delta - t}] for t <= a."""
    u = a + delta - t
    return (u + 1.0 / gamma1) * math.exp(-gamma1 * u)


def gap_mean_scenario3(t: float, gamma1: float, rho: float, a: float,
                       delta: float) -> float:
    """Mean covered share of a gap whose right obstacle overlaps the segment:
    E[(rho U - u)/(rho-1) 1{u/rho <= U <= u}] with u = a + delta - t.

    Closed form of the integral of ((rho v - u)/(rho-1)) gamma1 e^{-gamma1 v}
    over [u/rho, u].
    """
    u = a + delta - t
    if u <= 0.0:
        return 0.0
    scale = rho / (gamma1 * (rho - 1.0))
    return scale * (math.exp(-gamma1 * u / rho) - math.exp(-gamma1 * u)) \
        - u * math.exp(-gamma1 * u)


def gap0_term(params: ExpoEnvParams, geo: StreetGeometry) -> float:
    """Leading-gap contribution used by the series route.

    This is the analytic continuation of the scenario-1 mean at t = 0; it is
    exactly the extra r^0 term that makes the series total agree with the
    closed form (whose geometric factor is 1/(1-r), not r/(1-r)).
    """
    return gap_mean_scenario1(0.0, params.gamma1, geo.rho, geo.a)


def gap0_convention_offset(params: ExpoEnvParams, geo: StreetGeometry) -> float:
    """Diagnostic: closed-form gap-0 term minus the case-split gap-0 mean.

    The closed form carries the scenario-1 continuation for the gap holding
    the origin even when a > 0, while the per-realization case split (and
    hence the Monte-Carlo estimate) applies scenarios 2/3 there.  The two
    agree exactly at a = 0 and differ by roughly a/(rho-1) otherwise.
    """
    g1, rho, a, delta = params.gamma1, geo.rho, geo.a, geo.delta
    if a <= 0.0:
        return 0.0
    exact = gap_mean_scenario2(0.0, g1, a, delta) \
        + gap_mean_scenario3(0.0, g1, rho, a, delta)
    return gap0_term(params, geo) - exact


def _f_i_moments(i: int, params: ExpoEnvParams) -> tuple[float, float]:
    mean = i * (params.mean_free + params.mean_obstacle)
    var = i * (params.mean_free ** 2 + params.mean_obstacle ** 2)
    return mean, math.sqrt(var)


def _sum_gap_series(term_fn, leading: float, series: SeriesConfig,
                    what: str) -> tuple[float, list, int]:
    """Accumulate per-index terms until `consecutive_small` of them fall below
    term_tol times the running total."""
    total = leading
    corrections: list[tuple[int, float, float, float]] = []
    small_streak = 0
    i = 0
    while small_streak < series.consecutive_small:
        i += 1
        if i > series.i_max:
            raise SeriesConvergenceError(
                f"{what}: gap series not converged after {series.i_max} terms",
                partial=total, terms=series.i_max)
        a_i, b_i, c_i = term_fn(i)
        corrections.append((i, a_i, b_i, c_i))
        term = a_i + b_i + c_i
        total -= term
        if abs(term) < series.term_tol * abs(total):
            small_streak += 1
        else:
            small_streak = 0
    return total, corrections, i


def mean_covered_length_series(params: ExpoEnvParams, geo: StreetGeometry,
                               quad: QuadratureConfig | None = None,
                               series: SeriesConfig | None = None
                               ) -> MeanLengthBreakdown:
    """Mean covered length by integrating per-gap means against the
    obstacle-end densities (slowly converging geometric series)."""
    verify_closed_forms()
    quad = quad or QuadratureConfig()
    series = series or SeriesConfig()
    g1, rho, a, delta = params.gamma1, geo.rho, geo.a, geo.delta

    def term(i: int) -> tuple[float, float, float]:
        mean, std = _f_i_moments(i, params)
        upper = mean + 12.0 * std
        if upper <= a:
            s1 = 0.0
        else:
            s1 = integrate(
                lambda t: gap_mean_scenario1(t, g1, rho, a) * density_f_i(i, params, t),
                a, upper, quad)
        if a > 0.0:
            s2 = integrate(
                lambda t: gap_mean_scenario2(t, g1, a, delta) * density_f_i(i, params, t),
                0.0, a, quad)
            s3 = integrate(
                lambda t: gap_mean_scenario3(t, g1, rho, a, delta) * density_f_i(i, params, t),
                0.0, a, quad)
        else:
            s2 = s3 = 0.0
        # negated so that total = leading - sum(corrections)
        return (-s1, -s2, -s3)

    leading = gap0_term(params, geo)
    total, corrections, n_terms = _sum_gap_series(term, leading, series,
                                                  "series route")
    return MeanLengthBreakdown(total=total, leading_term=leading,
                               per_i_corrections=tuple(corrections),
                               truncation_index=n_terms,
                               r=geometric_ratio(params, rho))


def mean_covered_length_closed_form(params: ExpoEnvParams, geo: StreetGeometry,
                                    quad: QuadratureConfig | None = None,
                                    series: SeriesConfig | None = None
                                    ) -> MeanLengthBreakdown:
    """Mean covered length in closed form: geometric leading term minus a
    factorially convergent sum of integrals over [0, a].

    With a = 0 every correction vanishes and the value is exactly
    1 / (gamma1 (1 - r)).
    """
    verify_closed_forms()
    quad = quad or QuadratureConfig()
    series = series or SeriesConfig()
    g1, rho, a, delta = params.gamma1, geo.rho, geo.a, geo.delta

    one_minus_r = one_minus_geometric_ratio(params, rho)
    leading = math.exp(g1 * a / (rho - 1.0)) / (g1 * one_minus_r)
    if a == 0.0:
        return MeanLengthBreakdown(total=leading, leading_term=leading,
                                   per_i_corrections=(), truncation_index=0,
                                   r=1.0 - one_minus_r)

    # The three correction integrands share the factor f_i(t); the remaining
    # exponentials are the scenario weights rewritten against that density.
    w2 = math.exp(-g1 * (a + delta)) / (rho - 1.0)
    w3 = rho * math.exp(-g1 * (a + delta) / rho) / (rho - 1.0)

    def term(i: int) -> tuple[float, float, float]:
        a_i = integrate(
            lambda t: math.exp(-g1 * (t - a) / (rho - 1.0)) / g1
            * density_f_i(i, params, t), 0.0, a, quad)
        b_i = integrate(
            lambda t: w2 / g1 * math.exp(g1 * t) * density_f_i(i, params, t),
            0.0, a, quad)
        c_i = -integrate(
            lambda t: w3 / g1 * math.exp(g1 * t / rho) * density_f_i(i, params, t),
            0.0, a, quad)
        return (a_i, b_i, c_i)

    total, corrections, n_terms = _sum_gap_series(term, leading, series,
                                                  "closed form")
    return MeanLengthBreakdown(total=total, leading_term=leading,
                               per_i_corrections=tuple(corrections),
                               truncation_index=n_terms,
                               r=1.0 - one_minus_r)


def mean_covered_length_approx(params: ExpoEnvParams, geo: StreetGeometry) -> float:
    """Correction-free approximation 1/(gamma1 (1-r)), accurate when
    gamma1 * a << rho - 1.

    Evaluates both algebraic forms (the direct one and the alpha rewrite) and
    checks they agree to machine precision before returning.
    """
    direct = 1.0 / (params.gamma1 * one_minus_geometric_ratio(params, geo.rho))
    alpha_form = mean_covered_length_approx_alpha_form(params, geo)
    if abs(direct - alpha_form) > 1e-12 * abs(direct):
        raise AssertionError(
            f"approximation forms disagree: {direct} vs {alpha_form}")
    return direct


def mean_covered_length_approx_alpha_form(params: ExpoEnvParams,
                                          geo: StreetGeometry) -> float:
    """The same approximation written in alpha = gamma2/gamma1:
    (1/gamma1) rho (alpha + 1/(rho-1)) / (1 + alpha + 1/(rho-1))."""
    alpha = params.alpha
    rho = geo.rho
    s = 1.0 / (rho - 1.0)
    return rho * (alpha + s) / (params.gamma1 * (1.0 + alpha + s))


_closed_forms_verified = False


def verify_closed_forms(tol: float = 1e-9) -> None:
    """One-time check of the scenario closed forms against quadrature.

    Runs before the first analytic evaluation in a process; raises if any
    closed form strays from its defining integral by more than tol.
    """
    global _closed_forms_verified
    if _closed_forms_verified:
        return
    quad = QuadratureConfig()
    cases = [(0.5, 20.0, 0.0, 0.0, 3.0), (1.0, 5.0, 2.0, 1.0, 0.5),
             (2.0, 50.0, 1.0, 0.0, 0.7), (0.8, 8.0, 4.0, 2.5, 3.2)]
    for g1, rho, a, delta, t in cases:
        s = max(t - a, 0.0) / (rho - 1.0)
        oracle1 = integrate_semi_infinite(
            lambda v: v * g1 * math.exp(-g1 * (v + s)), quad)
        got1 = gap_mean_scenario1(a + s * (rho - 1.0), g1, rho, a)
        if abs(got1 - oracle1) > tol * max(1.0, abs(oracle1)):
            raise AssertionError(
                f"scenario-1 closed form off by {got1 - oracle1} at {(g1, rho, a, t)}")
        tt = min(t, a)
        u = a + delta - tt
        oracle2 = integrate_semi_infinite(
            lambda v: (v + u) * g1 * math.exp(-g1 * (v + u)), quad)
        got2 = gap_mean_scenario2(tt, g1, a, delta)
        if abs(got2 - oracle2) > tol * max(1.0, abs(oracle2)):
            raise AssertionError(
                f"scenario-2 closed form off by {got2 - oracle2} at {(g1, a, delta, tt)}")
        if u > 0:
            oracle3 = integrate(
                lambda v: (rho * v - u) / (rho - 1.0) * g1 * math.exp(-g1 * v),
                u / rho, u, quad)
            got3 = gap_mean_scenario3(tt, g1, rho, a, delta)
            if abs(got3 - oracle3) > tol * max(1.0, abs(oracle3)):
                raise AssertionError(
                    f"scenario-3 closed form off by {got3 - oracle3} at {(g1, rho, a, delta, tt)}")
    _closed_forms_verified = True

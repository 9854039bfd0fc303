"""Special functions and quadrature shared by the analytic computations.

Everything here is a pure function of its inputs and safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import quad

__all__ = [
    "QuadratureConfig",
    "SeriesConfig",
    "EvaluationError",
    "QuadratureError",
    "kummer_m",
    "kummer_m_log",
    "integrate",
    "integrate_semi_infinite",
]

# Rescale threshold used while summing series of large positive terms.
_SCALE_LIMIT = 1e290
_LOG_SCALE_LIMIT = math.log(_SCALE_LIMIT)
_MAX_SERIES_TERMS = 2_000_000


class EvaluationError(ArithmeticError):
    """A special-function evaluation produced a non-finite value."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}")


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation control for the index sums in the mean-length formulas."""

    term_tol: float = 1e-10
    consecutive_small: int = 3
    i_max: int = 200

    def __post_init__(self):
        if not self.term_tol > 0:
            raise ValueError(f"term_tol must be > 0, got {self.term_tol}")
        if self.i_max < 1:
            raise ValueError(f"i_max must be >= 1, got {self.i_max}")
        if self.consecutive_small < 1:
            raise ValueError(f"consecutive_small must be >= 1, got {self.consecutive_small}")


def _kummer_series_scaled(a: float, b: float, z: float, term_tol: float) -> tuple[float, float]:
    """Sum the ascending series for M(a,b,z), z >= 0, with overflow rescaling.

    Returns (s, log_scale) with M = s * exp(log_scale).  All terms are
    positive for z >= 0, so the running sum is monotone and the stopping
    rule |t_k| < term_tol * |sum| bounds the truncated tail.  Large z needs
    O(z) terms; past a few hundred the blocked log-space path is faster.
    """
    if z > 300.0:
        return _kummer_series_blocked(a, b, z, term_tol)
    s = 1.0
    t = 1.0
    log_scale = 0.0
    k = 0
    while True:
        t *= (a + k) * z / ((b + k) * (k + 1.0))
        s += t
        k += 1
        if t < term_tol * s:
            return s, log_scale
        if s > _SCALE_LIMIT:
            s /= _SCALE_LIMIT
            t /= _SCALE_LIMIT
            log_scale += _LOG_SCALE_LIMIT
        if k > _MAX_SERIES_TERMS:
            raise EvaluationError(f"Kummer series did not converge for (a={a}, b={b}, z={z})")


def _kummer_series_blocked(a: float, b: float, z: float, term_tol: float,
                           block: int = 1024) -> tuple[float, float]:
    """Same series, accumulated block-wise in log space (no overflow)."""
    import numpy as np

    log_total = 0.0       # log of the partial sum so far
    log_t = 0.0           # log of the last term added
    k = 0
    while True:
        ks = np.arange(k, k + block, dtype=float)
        log_ratios = (np.log((a + ks) * z) - np.log(b + ks) - np.log(ks + 1.0))
        log_terms = log_t + np.cumsum(log_ratios)
        m = max(log_total, float(log_terms.max()))
        total = math.exp(log_total - m) + float(np.exp(log_terms - m).sum())
        log_total = m + math.log(total)
        log_t = float(log_terms[-1])
        k += block
        if log_t < math.log(term_tol) + log_total:
            return 1.0, log_total
        if k > _MAX_SERIES_TERMS:
            raise EvaluationError(f"Kummer series did not converge for (a={a}, b={b}, z={z})")


def _check_kummer_args(a: float, b: float) -> None:
    if not (b > a > 0):
        raise ValueError(f"kummer_m requires b > a > 0, got a={a}, b={b}")


def _kummer_log_large_z(a: int, b: float, z: float) -> float:
    """log M(a,b,z) via the large-argument form, for integer a and z >> a^2.

    With integer a the expansion e^z z^{a-b} Gamma(b)/Gamma(a) * sum
    terminates after a terms; the neglected companion solution is smaller by
    a factor e^{-z}, so this is exact to double precision once z >= 100.
    Successive terms shrink by at least half when z >= 2 a^2, so the
    alternating sum cannot cancel.
    """
    s = 1.0
    term = 1.0
    for k in range(a - 1):
        term *= (b - a + k) * (1 - a + k) / ((k + 1.0) * z)
        s += term
    return z + (a - b) * math.log(z) + math.lgamma(b) - math.lgamma(a) + math.log(s)


def _use_large_z(a: float, z: float) -> bool:
    return z >= max(100.0, 2.0 * a * a) and float(a).is_integer()


def kummer_m_log(a: float, b: float, z: float, term_tol: float = 1e-15) -> float:
    """log M(a,b,z) for b > a > 0; safe where M itself would overflow."""
    _check_kummer_args(a, b)
    if z == 0.0:
        return 0.0
    if z < 0.0:
        # M(a,b,z) = exp(z) * M(b-a,b,-z), summing only for non-negative argument
        if _use_large_z(b - a, -z):
            return z + _kummer_log_large_z(int(b - a), b, -z)
        s, log_scale = _kummer_series_scaled(b - a, b, -z, term_tol)
        return z + math.log(s) + log_scale
    if _use_large_z(a, z):
        return _kummer_log_large_z(int(a), b, z)
    s, log_scale = _kummer_series_scaled(a, b, z, term_tol)
    return math.log(s) + log_scale


def kummer_m(a: float, b: float, z: float, term_tol: float = 1e-15) -> float:
    """Confluent hypergeometric M(a,b,z) for b > a > 0.

    Negative arguments are routed through the transformation
    M(a,b,z) = exp(z) M(b-a,b,-z), so the power series only ever sums
    non-negative arguments (no catastrophic cancellation).
    """
    _check_kummer_args(a, b)
    if z == 0.0:
        return 1.0
    try:
        if z < 0.0 or _use_large_z(a, z):
            value = math.exp(kummer_m_log(a, b, z, term_tol))
        else:
            s, log_scale = _kummer_series_scaled(a, b, z, term_tol)
            value = s * math.exp(log_scale) if log_scale != 0.0 else s
    except OverflowError:
        raise EvaluationError(f"kummer_m overflowed for (a={a}, b={b}, z={z})") from None
    if not math.isfinite(value):
        raise EvaluationError(f"kummer_m overflowed for (a={a}, b={b}, z={z})")
    return value


def integrate(f: Callable[[float], float], lo: float, hi: float,
              cfg: QuadratureConfig | None = None) -> float:
    """Adaptive quadrature of f on [lo, hi].

    The estimate satisfies error <= max(abs_tol, rel_tol * |result|); if the
    subdivision budget is exhausted first, a QuadratureError carrying the
    best estimate is raised.
    """
    if cfg is None:
        cfg = QuadratureConfig()
    if lo > hi:
        raise ValueError(f"integrate requires lo <= hi, got [{lo}, {hi}]")
    if lo == hi:
        return 0.0
    result = quad(f, lo, hi, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                  limit=cfg.max_subdivisions, full_output=1)
    if len(result) > 3:
        y, err = result[0], result[1]
        raise QuadratureError(
            f"quadrature on [{lo}, {hi}] did not converge: {result[3]}", y, err)
    y, err = result[0], result[1]
    if not math.isfinite(y):
        raise QuadratureError(f"quadrature on [{lo}, {hi}] is non-finite", y, err)
    return y


def integrate_semi_infinite(f: Callable[[float], float],
                            cfg: QuadratureConfig | None = None) -> float:
    """Integral of a decaying f over [0, inf).

    Uses y = tan(u) to map onto the finite interval [0, pi/2) and then
    defers to the adaptive rule.
    """

    def transformed(u: float) -> float:
        t = math.tan(u)
        return f(t) * (1.0 + t * t)

    return integrate(transformed, 0.0, math.pi / 2.0, cfg)

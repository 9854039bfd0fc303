"""Street geometry and the alternating obstacle/free-space renewal process.

The street is modelled on the half-line right of a reference user at the
origin: obstacles are depth-d rectangles along the wall, separated by free
intervals, and a reflecting surface segment [a, a+delta] sits on the wall at
distance l from the user line.  Free/obstacle lengths alternate as an
independent renewal sequence; the origin is conditioned to lie in free space,
with the first free interval drawn from the stationary residual law.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Protocol, Union

import numpy as np

from .numerics import EvaluationError, kummer_m_log

__all__ = [
    "StreetGeometry",
    "ExpoEnvParams",
    "GeneralEnvParams",
    "DistributionHandle",
    "Environment",
    "EnvParams",
    "sample_environment",
    "density_f_i",
    "tau_before",
    "default_window",
]


@dataclass(frozen=True)
class StreetGeometry:
    """Scene constants: wall distance l, obstacle depth d, surface [a, a+delta]."""

    l: float
    d: float
    a: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if not (self.l > self.d > 0):
            raise ValueError(f"need l > d > 0, got l={self.l}, d={self.d}")
        if self.a < 0:
            raise ValueError(f"a must be >= 0, got {self.a}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")

    @property
    def rho(self) -> float:
        """Width-to-depth ratio l/d; shadows scale like 1/(rho - 1)."""
        return self.l / self.d

    @classmethod
    def from_rho(cls, rho: float, l: float = 10.0, a: float = 0.0,
                 delta: float = 0.0) -> "StreetGeometry":
        if rho <= 1:
            raise ValueError(f"rho must exceed 1, got {rho}")
        return cls(l=l, d=l / rho, a=a, delta=delta)


@dataclass(frozen=True)
class ExpoEnvParams:
    """Exponential free-interval rate gamma1 and obstacle-length rate gamma2 (1/m)."""

    gamma1: float
    gamma2: float

    def __post_init__(self):
        if not self.gamma1 > 0:
            raise ValueError(f"gamma1 must be > 0, got {self.gamma1}")
        if not self.gamma2 > 0:
            raise ValueError(f"gamma2 must be > 0, got {self.gamma2}")

    @property
    def alpha(self) -> float:
        return self.gamma2 / self.gamma1

    @property
    def mean_free(self) -> float:
        return 1.0 / self.gamma1

    @property
    def mean_obstacle(self) -> float:
        return 1.0 / self.gamma2

    def sample_free(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.exponential(self.mean_free, size)

    def sample_obstacle(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.exponential(self.mean_obstacle, size)

    def sample_first_free(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # stationary residual of an exponential is the same exponential
        return rng.exponential(self.mean_free, size)


class DistributionHandle(Protocol):
    """Sampler handle: draw(rng, size) -> array, plus the distribution mean."""

    mean: float

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray: ...


@dataclass(frozen=True)
class CallableDistribution:
    """Wrap a plain sampling function as a distribution handle."""

    sample_fn: Callable[[np.random.Generator, int], np.ndarray]
    mean: float
    cdf: Callable[[float], float] | None = None

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.asarray(self.sample_fn(rng, size), dtype=float)


@dataclass(frozen=True)
class GeneralEnvParams:
    """Arbitrary free/obstacle length laws, for sampling and Monte-Carlo only.

    stationary_first is the residual law of the free interval containing the
    origin (density (1 - F_free) / mean_free); it must be supplied by the
    caller since it is not derivable from a bare sampler.
    """

    free: DistributionHandle
    obstacle: DistributionHandle
    stationary_first: DistributionHandle

    def __post_init__(self):
        for name, handle in (("free", self.free), ("obstacle", self.obstacle)):
            if not (math.isfinite(handle.mean) and handle.mean > 0):
                raise ValueError(f"{name} distribution needs a finite positive mean")

    @property
    def mean_free(self) -> float:
        return self.free.mean

    @property
    def mean_obstacle(self) -> float:
        return self.obstacle.mean

    def sample_free(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.free.draw(rng, size)

    def sample_obstacle(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.obstacle.draw(rng, size)

    def sample_first_free(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.stationary_first.draw(rng, size)


EnvParams = Union[ExpoEnvParams, GeneralEnvParams]


@dataclass(frozen=True)
class Environment:
    """One sampled realization: ordered obstacle intervals on the window (0, T].

    Obstacle i spans [starts[i], ends[i]]; starts[0] > 0 so the origin is in
    free space.  The last obstacle may end beyond the window.
    """

    window: float
    starts: np.ndarray
    ends: np.ndarray

    def __post_init__(self):
        starts = np.asarray(self.starts, dtype=float)
        ends = np.asarray(self.ends, dtype=float)
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "ends", ends)
        if self.window <= 0:
            raise ValueError(f"window must be > 0, got {self.window}")
        if starts.shape != ends.shape or starts.ndim != 1:
            raise ValueError("starts/ends must be 1-d arrays of equal length")
        if starts.size:
            if starts[0] <= 0:
                raise ValueError("the origin must lie in free space (first start > 0)")
            if not np.all(ends > starts):
                raise ValueError("each obstacle needs end > start")
            if not np.all(starts[1:] > ends[:-1]):
                raise ValueError("obstacles must be strictly ordered and disjoint")
            if starts[-1] >= self.window:
                raise ValueError("obstacles must intersect the window (start < window)")

    @property
    def n_obstacles(self) -> int:
        return int(self.starts.size)

    def free_lengths(self) -> np.ndarray:
        """U_i reconstructed from the interval endpoints."""
        prev_ends = np.concatenate(([0.0], self.ends[:-1]))
        return self.starts - prev_ends

    def obstacle_lengths(self) -> np.ndarray:
        return self.ends - self.starts

    def covered_by_obstacle(self, y: float) -> bool:
        i = bisect.bisect_right(self.starts.tolist(), y) - 1
        return i >= 0 and y <= self.ends[i]

    @classmethod
    def from_intervals(cls, window: float, intervals) -> "Environment":
        arr = np.asarray(list(intervals), dtype=float).reshape(-1, 2)
        return cls(window=window, starts=arr[:, 0].copy(), ends=arr[:, 1].copy())


def default_window(params: EnvParams, geo: StreetGeometry) -> float:
    """Monte-Carlo window large enough that coverage beyond it is negligible.

    Coverage of a gap starting at t decays like exp(-gamma1 (t-a)/(rho-1)),
    so a + delta + 50 * rho * mean_free exhausts the coverable region.
    """
    return geo.a + geo.delta + 50.0 * geo.rho * params.mean_free


def sample_environment(params: EnvParams, t_max: float,
                       rng: np.random.Generator) -> Environment:
    """Draw one realization of the obstacle process on (0, t_max].

    The first free length comes from the stationary residual law; free and
    obstacle lengths then alternate until the window is exceeded.  Returned
    obstacles are exactly those whose start lies inside the window.
    """
    if t_max <= 0:
        raise ValueError(f"t_max must be > 0, got {t_max}")
    mean_cycle = params.mean_free + params.mean_obstacle
    batch = max(32, int(1.5 * t_max / mean_cycle) + 16)

    starts: list[float] = []
    ends: list[float] = []
    pos = 0.0
    first = True
    while pos <= t_max:
        u = params.sample_free(rng, batch)
        if first:
            u[0] = params.sample_first_free(rng, 1)[0]
            first = False
        w = params.sample_obstacle(rng, batch)
        for k in range(batch):
            b = pos + u[k]
            if b >= t_max:
                pos = b
                break
            e = b + w[k]
            starts.append(b)
            ends.append(e)
            pos = e
            if pos > t_max:
                break
        # loop again only if the window is not yet exceeded
    return Environment(window=t_max,
                       starts=np.asarray(starts, dtype=float),
                       ends=np.asarray(ends, dtype=float))


@lru_cache(maxsize=4096)
def _lgamma_int(n: int) -> float:
    return math.lgamma(n)


def density_f_i(i: int, params: ExpoEnvParams, t: float) -> float:
    """Density of the end of the i-th obstacle, i.e. of a sum of i free and i
    obstacle exponential lengths.

    Assembled in log space: (gamma1*gamma2)^i / (2i-1)! overflows naive
    arithmetic near i ~ 90.
    """
    if not isinstance(i, (int, np.integer)) or i < 1:
        raise ValueError(f"i must be a positive integer, got {i}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 0.0
    g1, g2 = params.gamma1, params.gamma2
    log_val = (i * math.log(g1 * g2)
               - _lgamma_int(2 * i)
               + (2 * i - 1) * math.log(t)
               - g2 * t
               + kummer_m_log(float(i), float(2 * i), (g2 - g1) * t))
    value = math.exp(log_val)
    if not math.isfinite(value):
        raise EvaluationError(f"density_f_i overflowed at i={i}, t={t}")
    return value


def tau_before(env: Environment, y: float, before_first: str = "origin") -> float:
    """Distance from y back to the end of the last obstacle before y.

    With no obstacle before y the distance is to the origin by default
    (before_first="origin"), or +inf with before_first="infinite".
    """
    if env.covered_by_obstacle(y):
        raise ValueError(f"position {y} lies inside an obstacle")
    i = bisect.bisect_right(env.ends.tolist(), y) - 1
    if i < 0:
        if before_first == "origin":
            return y
        if before_first == "infinite":
            return math.inf
        raise ValueError(f"unknown before_first mode {before_first!r}")
    return y - float(env.ends[i])

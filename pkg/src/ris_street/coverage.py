"""Per-realization covered sets and Monte-Carlo estimation of the mean
covered length.

Two independent routes compute coverage of a realization:

* covered_set_scenarios applies the per-gap case split (the model under
  study) directly to the obstacle intervals;
* is_visible / grid_scan_covered_set answers the exact geometric question
  "is the required surface segment visible over every obstacle rectangle",
  which serves as the oracle for the former.

The case split intentionally reproduces the model even where exact geometry
disagrees (multi-obstacle occlusion left of the surface, gaps whose right
obstacle overlaps the segment); scenario_discrepancy quantifies the gap
instead of patching it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .mc_runner import DEFAULT_CHUNK, mean_and_stderr, run_chunked
from .street import Environment, EnvParams, StreetGeometry, default_window

__all__ = [
    "CoveredSet",
    "McEstimate",
    "is_visible",
    "covered_set_scenarios",
    "grid_scan_covered_set",
    "scenario_discrepancy",
    "mc_mean_covered_length",
    "mean_connectable_customers",
    "sample_connectable_count",
]


@dataclass(frozen=True)
class CoveredSet:
    """Finite disjoint union of intervals, sorted left to right."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        prev_hi = -math.inf
        for lo, hi in self.intervals:
            if not lo < hi:
                raise ValueError(f"degenerate interval ({lo}, {hi})")
            if lo < prev_hi:
                raise ValueError("intervals must be sorted and disjoint")
            prev_hi = hi

    @property
    def total_length(self) -> float:
        total = 0.0
        for lo, hi in self.intervals:
            total += hi - lo
        return total

    def __iter__(self):
        return iter(self.intervals)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_trials: int
    warning: str | None = None

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be >= 0")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")


def _gap_covered_interval(t: float, b_next: float, geo: StreetGeometry
                          ) -> tuple[float, float] | None:
    """Covered interval of the free gap [t, b_next] under the case split.

    t is the end of the bounding obstacle on the left (0 for the gap holding
    the origin).  Matches kernels._gap_covered exactly.
    """
    a, delta, rho = geo.a, geo.delta, geo.rho
    if t >= a:
        left = t + (t - a) / (rho - 1.0)
        if left >= b_next:
            return None
        return (left, b_next)
    if b_next >= a + delta:
        return (t, b_next)
    right = (rho * b_next - (a + delta)) / (rho - 1.0)
    if right <= t:
        return None
    return (t, right)


def covered_set_scenarios(env: Environment, geo: StreetGeometry,
                          include_gap0: bool = True) -> CoveredSet:
    """Covered set of one realization via the per-gap case split.

    Every free gap, including the one containing the origin (left endpoint
    treated as 0), contributes independently; the trailing incomplete gap is
    clipped at the window edge.
    """
    intervals: list[tuple[float, float]] = []
    t = 0.0
    gap_index = 0
    for b, e in zip(env.starts, env.ends):
        if include_gap0 or gap_index > 0:
            iv = _gap_covered_interval(t, float(b), geo)
            if iv is not None:
                intervals.append(iv)
        gap_index += 1
        if e >= env.window:
            return CoveredSet(tuple(intervals))
        t = float(e)
    if include_gap0 or gap_index > 0:
        iv = _gap_covered_interval(t, env.window, geo)
        if iv is not None:
            intervals.append(iv)
    return CoveredSet(tuple(intervals))


def _sight_blocked(p: float, b: float, e: float, geo: StreetGeometry) -> bool:
    """Does obstacle [b, e] x [0, d] intersect the sight region from p to the
    surface segment [a, a+delta] at height l?

    At height y the sight region spans [p + (a-p) y/l, p + (a+delta-p) y/l];
    both constraints "left edge <= e" and "right edge >= b" are linear in y,
    so feasibility over y in [0, d] reduces to endpoint tests.
    """
    a, delta, l, d = geo.a, geo.delta, geo.l, geo.d

    def feasible_range(c0: float, c1: float) -> tuple[float, float] | None:
        # {y in [0, d] : c0 + (c1 - c0) * y/d >= 0} for a linear constraint
        # with values c0 at y=0 and c1 at y=d.
        if c0 >= 0.0 and c1 >= 0.0:
            return (0.0, d)
        if c0 < 0.0 and c1 < 0.0:
            return None
        y_star = d * c0 / (c0 - c1)
        if c0 >= 0.0:
            return (0.0, y_star)
        return (y_star, d)

    # left(y) <= e  <=>  e - left(y) >= 0
    r1 = feasible_range(e - p, e - (p + (a - p) * d / l))
    if r1 is None:
        return False
    # right(y) >= b  <=>  right(y) - b >= 0
    r2 = feasible_range(p - b, (p + (a + delta - p) * d / l) - b)
    if r2 is None:
        return False
    return max(r1[0], r2[0]) <= min(r1[1], r2[1])


def is_visible(p: float, env: Environment, geo: StreetGeometry) -> bool:
    """Exact geometric test: p lies in free space and the whole segment
    [a, a+delta] is visible over every obstacle rectangle."""
    if env.covered_by_obstacle(p):
        return False
    for b, e in zip(env.starts, env.ends):
        if _sight_blocked(p, float(b), float(e), geo):
            return False
    return True


def grid_scan_covered_set(env: Environment, geo: StreetGeometry,
                          points_per_unit: float = 1e4,
                          refine_tol: float = 1e-10,
                          refine_near=()) -> CoveredSet:
    """Oracle covered set: dense is_visible scan with bisection-refined edges.

    The grid locates visibility transitions; each transition is then driven
    down to refine_tol by bisecting is_visible, so interval endpoints are
    exact up to refine_tol regardless of the grid pitch.  refine_near adds a
    10x finer local grid around the given positions so that features shorter
    than the base pitch (near predicted interval endpoints) are not skipped.
    """
    t_max = env.window
    n = max(16, int(points_per_unit * t_max))
    pts = np.linspace(0.0, t_max, n)
    if len(refine_near):
        pitch = t_max / (n - 1)
        local = np.concatenate([np.linspace(c - 2.0 * pitch, c + 2.0 * pitch, 41)
                                for c in refine_near])
        pts = np.unique(np.concatenate([pts, np.clip(local, 0.0, t_max)]))
        n = pts.size
    mask = _visibility_mask(pts, env, geo)

    def refine(lo: float, hi: float, want_visible_right: bool) -> float:
        # invariant: visibility differs between lo and hi
        while hi - lo > refine_tol:
            mid = 0.5 * (lo + hi)
            if is_visible(mid, env, geo) == want_visible_right:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    intervals: list[tuple[float, float]] = []
    start: float | None = 0.0 if mask[0] else None
    for k in range(1, n):
        if mask[k] and not mask[k - 1]:
            start = refine(pts[k - 1], pts[k], True)
        elif not mask[k] and mask[k - 1]:
            assert start is not None
            end = refine(pts[k - 1], pts[k], False)
            if end > start:
                intervals.append((start, end))
            start = None
    if start is not None and t_max > start:
        intervals.append((start, t_max))
    return CoveredSet(tuple(intervals))


def _visibility_mask(pts: np.ndarray, env: Environment,
                     geo: StreetGeometry) -> np.ndarray:
    """Vectorized is_visible over a grid of positions."""
    a, delta, l, d = geo.a, geo.delta, geo.l, geo.d
    mask = np.ones(pts.size, dtype=bool)
    if env.n_obstacles == 0:
        return mask
    idx = np.searchsorted(env.starts, pts, side="right") - 1
    inside = (idx >= 0) & (pts <= env.ends[np.clip(idx, 0, None)])
    mask &= ~inside

    b = env.starts[None, :]
    e = env.ends[None, :]
    p = pts[:, None]
    # constraint 1: e - left(y) >= 0 at y=0 and y=d
    c10 = e - p
    c11 = e - (p + (a - p) * (d / l))
    # constraint 2: right(y) - b >= 0 at y=0 and y=d
    c20 = p - b
    c21 = (p + (a + delta - p) * (d / l)) - b

    def rng_lo_hi(c0, c1):
        both_neg = (c0 < 0) & (c1 < 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            y_star = d * c0 / (c0 - c1)
        lo = np.where(c0 >= 0, 0.0, y_star)
        hi = np.where(c1 >= 0, d, y_star)
        return lo, hi, both_neg

    lo1, hi1, dead1 = rng_lo_hi(c10, c11)
    lo2, hi2, dead2 = rng_lo_hi(c20, c21)
    blocked = (~dead1 & ~dead2 &
               (np.maximum(lo1, lo2) <= np.minimum(hi1, hi2)))
    mask &= ~blocked.any(axis=1)
    return mask


def scenario_discrepancy(env: Environment, geo: StreetGeometry,
                         points_per_unit: float = 1e3) -> float:
    """Measure of symmetric difference between the case-split covered set and
    the exact geometric oracle (diagnostic for the model's approximations)."""
    t_max = env.window
    n = max(64, int(points_per_unit * t_max))
    pts = np.linspace(0.0, t_max, n)
    oracle = _visibility_mask(pts, env, geo)
    scen = np.zeros(n, dtype=bool)
    for lo, hi in covered_set_scenarios(env, geo):
        scen |= (pts >= lo) & (pts <= hi)
    return float(np.mean(oracle != scen) * t_max)


def _estimate_cycles(params: EnvParams, t_max: float) -> int:
    mean_cycle = params.mean_free + params.mean_obstacle
    return max(32, int(1.5 * t_max / mean_cycle) + 64)


def _covered_lengths_chunk(gen: np.random.Generator, count: int,
                           params: EnvParams, t_max: float,
                           geo: StreetGeometry, include_gap0: bool,
                           kernels) -> np.ndarray:
    """Covered length of `count` independent realizations."""
    n_per = _estimate_cycles(params, t_max)
    u = np.ascontiguousarray(params.sample_free(gen, (count, n_per)))
    w = np.ascontiguousarray(params.sample_obstacle(gen, (count, n_per)))
    u[:, 0] = params.sample_first_free(gen, count)
    out = np.empty(count, dtype=float)
    n_exhausted = kernels.covered_length_batch(u, w, t_max, geo.a, geo.delta,
                                               geo.rho, include_gap0, out)
    if n_exhausted:
        for j in np.flatnonzero(np.isnan(out)):
            uj, wj = u[j], w[j]
            while True:
                extra_u = params.sample_free(gen, n_per)
                extra_w = params.sample_obstacle(gen, n_per)
                uj = np.concatenate([uj, extra_u])
                wj = np.concatenate([wj, extra_w])
                covered, status = kernels.covered_length_cycles(
                    uj, wj, t_max, geo.a, geo.delta, geo.rho, include_gap0)
                if status == kernels.STATUS_DONE:
                    out[j] = covered
                    break
    return out


def mc_mean_covered_length(params: EnvParams, geo: StreetGeometry,
                           n_trials: int, seed: int = 0, *,
                           window_t: float | None = None,
                           include_gap0: bool = True,
                           threads: int = 1,
                           chunk_size: int = DEFAULT_CHUNK,
                           kernels=None) -> McEstimate:
    """Monte-Carlo mean of the covered length over independent realizations.

    Deterministic for a given seed, independent of thread count: the trial
    stream is split into fixed chunks keyed by (seed, chunk index).
    """
    if kernels is None:
        kernels = backend.kernels
    t_max = default_window(params, geo) if window_t is None else window_t

    def worker(gen, count, _idx):
        return _covered_lengths_chunk(gen, count, params, t_max, geo,
                                      include_gap0, kernels)

    chunks = run_chunked(n_trials, seed, worker, threads=threads,
                         chunk_size=chunk_size)
    values = np.concatenate(chunks)
    mean, stderr = mean_and_stderr(values)
    warning = "single trial: stderr is not estimable" if n_trials == 1 else None
    return McEstimate(mean=mean, stderr=stderr, n_trials=n_trials,
                      warning=warning)


def mean_connectable_customers(mu: float, mean_length: float) -> float:
    """Expected number of reachable customers at user intensity mu."""
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    return mu * mean_length


def sample_connectable_count(env: Environment, geo: StreetGeometry, mu: float,
                             rng: np.random.Generator) -> int:
    """Customer count for one realization: Poisson(mu * covered length)."""
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    total = covered_set_scenarios(env, geo).total_length
    return int(rng.poisson(mu * total))

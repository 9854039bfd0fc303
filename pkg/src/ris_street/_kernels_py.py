"""Pure-Python fallback for the compiled kernels.

Drop-in replacement for ris_street._kernels selected at import time when the
extension is unavailable.  The arithmetic (including operation order) matches
the compiled code exactly, so both backends return bit-identical results;
only speed differs.  See benchmarks/bench_backends.py for the gap.
"""

from __future__ import annotations

import math

import numpy as np

STATUS_DONE = 0
STATUS_EXHAUSTED = 1
DEP_REJECTED = 0
DEP_ACCEPTED = 1
DEP_EXHAUSTED = 2


def _gap_covered(t: float, b_next: float, a: float, delta: float, rho: float) -> float:
    if t >= a:
        left = t + (t - a) / (rho - 1.0)
        if left >= b_next:
            return 0.0
        return b_next - left
    if b_next >= a + delta:
        return b_next - t
    right = (rho * b_next - (a + delta)) / (rho - 1.0)
    if right <= t:
        return 0.0
    return right - t


def covered_length_cycles(u, w, t_max, a, delta, rho, include_gap0):
    covered = 0.0
    t = 0.0
    skip = not include_gap0
    n = u.shape[0]
    for i in range(n):
        b = t + u[i]
        if b >= t_max:
            if not skip:
                covered += _gap_covered(t, t_max, a, delta, rho)
            return covered, STATUS_DONE
        if not skip:
            covered += _gap_covered(t, b, a, delta, rho)
        skip = False
        e = b + w[i]
        if e >= t_max:
            return covered, STATUS_DONE
        t = e
    return covered, STATUS_EXHAUSTED


def covered_length_batch(u, w, t_max, a, delta, rho, include_gap0, out):
    n_exhausted = 0
    for j in range(u.shape[0]):
        covered, status = covered_length_cycles(u[j], w[j], t_max, a, delta,
                                                rho, include_gap0)
        if status == STATUS_DONE:
            out[j] = covered
        else:
            out[j] = math.nan
            n_exhausted += 1
    return n_exhausted


def h0_interference(z, f, tau, counts, rho, k_const, out):
    p = 0
    for j in range(counts.shape[0]):
        acc = 0.0
        for _ in range(counts[j]):
            zz = z[p]
            if tau[p] >= zz / rho:
                acc += f[p] / (k_const + zz * zz)
            p += 1
        out[j] = acc


def dependent_trial(u, w, x, a, rho, k_const, qpos, fy, x_index):
    qi = 0
    fi = 0
    n = u.shape[0]
    nq = qpos.shape[0]
    last_end = 0.0
    acc = 0.0
    for i in range(n):
        b = last_end + u[i]
        while qi < nq and qpos[qi] < b:
            q = qpos[qi]
            if q - last_end >= (q - a) / rho:
                if qi == x_index:
                    qi += 1
                    continue
                acc += fy[fi] / (k_const + (q - a) * (q - a))
            elif qi == x_index:
                return DEP_REJECTED, 0.0
            if qi != x_index:
                fi += 1
            qi += 1
        if qi >= nq:
            return DEP_ACCEPTED, acc
        e = b + w[i]
        while qi < nq and qpos[qi] <= e:
            if qi == x_index:
                return DEP_REJECTED, 0.0
            fi += 1
            qi += 1
        if qi >= nq:
            return DEP_ACCEPTED, acc
        last_end = e
    return DEP_EXHAUSTED, 0.0

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops for the Monte-Carlo estimators.

Semantics (including operation order) must stay identical to _kernels_py.py:
the two backends are required to produce bit-identical results on the same
input arrays.
"""

from libc.stdint cimport int64_t

STATUS_DONE = 0
STATUS_EXHAUSTED = 1
DEP_REJECTED = 0
DEP_ACCEPTED = 1
DEP_EXHAUSTED = 2


cdef inline double _gap_covered(double t, double b_next, double a,
                                double delta, double rho) nogil:
    # Covered share of the free gap [t, b_next]; t is the end of the previous
    # obstacle (0 for the gap containing the origin).
    cdef double left, right
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


cpdef tuple covered_length_cycles(double[::1] u, double[::1] w, double t_max,
                                  double a, double delta, double rho,
                                  bint include_gap0):
    """Total covered length on the window (0, t_max] for one realization.

    u/w are the alternating free/obstacle lengths.  Returns (covered, status)
    where status is STATUS_EXHAUSTED when the arrays ran out before the
    window was exceeded (caller redraws with longer arrays).
    """
    cdef double covered = 0.0
    cdef double t = 0.0
    cdef double b, e
    cdef Py_ssize_t i, n = u.shape[0]
    cdef bint skip = not include_gap0
    with nogil:
        for i in range(n):
            b = t + u[i]
            if b >= t_max:
                if not skip:
                    covered += _gap_covered(t, t_max, a, delta, rho)
                with gil:
                    return covered, STATUS_DONE
            if not skip:
                covered += _gap_covered(t, b, a, delta, rho)
            skip = False
            e = b + w[i]
            if e >= t_max:
                with gil:
                    return covered, STATUS_DONE
            t = e
    return covered, STATUS_EXHAUSTED


cpdef int64_t covered_length_batch(double[:, ::1] u, double[:, ::1] w,
                                   double t_max, double a, double delta,
                                   double rho, bint include_gap0,
                                   double[::1] out) except -1:
    """Row-wise covered_length_cycles; exhausted rows get NaN in out.

    Returns the number of exhausted rows.
    """
    cdef Py_ssize_t j, i, m = u.shape[0], n = u.shape[1]
    cdef double covered, t, b, e
    cdef bint skip, done
    cdef int64_t n_exhausted = 0
    cdef double nan = float("nan")
    with nogil:
        for j in range(m):
            covered = 0.0
            t = 0.0
            skip = not include_gap0
            done = False
            for i in range(n):
                b = t + u[j, i]
                if b >= t_max:
                    if not skip:
                        covered += _gap_covered(t, t_max, a, delta, rho)
                    done = True
                    break
                if not skip:
                    covered += _gap_covered(t, b, a, delta, rho)
                skip = False
                e = b + w[j, i]
                if e >= t_max:
                    done = True
                    break
                t = e
            if done:
                out[j] = covered
            else:
                out[j] = nan
                n_exhausted += 1
    return n_exhausted


cpdef void h0_interference(double[::1] z, double[::1] f, double[::1] tau,
                           int64_t[::1] counts, double rho, double k_const,
                           double[::1] out):
    """Per-trial interference under independent coverage marks.

    z holds distances from the surface (y - a) for all trials concatenated,
    counts the per-trial point counts; a point contributes f/(K + z^2) when
    its mark satisfies tau >= z / rho.
    """
    cdef Py_ssize_t j, k, p = 0, m = counts.shape[0]
    cdef double acc, zz
    with nogil:
        for j in range(m):
            acc = 0.0
            for k in range(counts[j]):
                zz = z[p]
                if tau[p] >= zz / rho:
                    acc += f[p] / (k_const + zz * zz)
                p += 1
            out[j] = acc


cpdef tuple dependent_trial(double[::1] u, double[::1] w, double x, double a,
                            double rho, double k_const, double[::1] qpos,
                            double[::1] fy, Py_ssize_t x_index):
    """One obstacle realization against the fixed transmitter positions.

    qpos is sorted ascending and contains the probe position x at x_index;
    fy holds fadings for the non-x positions in the same order.  A position q
    is eligible when it lies in free space and its distance to the previous
    obstacle end is at least (q - a)/rho.  Returns (status, interference);
    the trial is rejected as soon as x itself is found ineligible.
    """
    cdef Py_ssize_t i, qi = 0, fi = 0, n = u.shape[0], nq = qpos.shape[0]
    cdef double last_end = 0.0
    cdef double b, e, q, acc = 0.0
    with nogil:
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
                    with gil:
                        return DEP_REJECTED, 0.0
                if qi != x_index:
                    fi += 1
                qi += 1
            if qi >= nq:
                with gil:
                    return DEP_ACCEPTED, acc
            e = b + w[i]
            while qi < nq and qpos[qi] <= e:
                if qi == x_index:
                    with gil:
                        return DEP_REJECTED, 0.0
                fi += 1
                qi += 1
            if qi >= nq:
                with gil:
                    return DEP_ACCEPTED, acc
            last_end = e
    return DEP_EXHAUSTED, 0.0

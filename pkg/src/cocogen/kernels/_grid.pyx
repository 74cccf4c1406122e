# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled grid-scan kernels; see _grid_py for the semantics contract."""

from libc.math cimport INFINITY
from libc.stdint cimport int64_t


def argmin_2d(const double[::1] bg1, const double[::1] lin1,
              const double[::1] g2, const double[::1] lin2):
    cdef Py_ssize_t m1 = bg1.shape[0]
    cdef Py_ssize_t m2 = g2.shape[0]
    cdef Py_ssize_t i, j, bi = 0, bj = 0
    cdef double best = INFINITY
    cdef double a, la, f
    for i in range(m1):
        a = bg1[i]
        la = lin1[i]
        for j in range(m2):
            f = (a * g2[j] + la) + lin2[j]
            if f < best:
                best = f
                bi = i
                bj = j
    return best, bi, bj


def argmin_3d(const double[::1] bg1, const double[::1] lin1,
              const double[::1] g2, const double[::1] lin2,
              const double[::1] hull_slope, const double[::1] hull_inter,
              const double[::1] hull_thresh, const int64_t[::1] hull_k):
    cdef Py_ssize_t m1 = bg1.shape[0]
    cdef Py_ssize_t m2 = g2.shape[0]
    cdef Py_ssize_t n_hull = hull_slope.shape[0]
    cdef Py_ssize_t i, j, h, bi = 0, bj = 0
    cdef int64_t bk = 0
    cdef double best = INFINITY
    cdef double a, la, q, f, base
    for i in range(m1):
        a = bg1[i]
        la = lin1[i]
        # q decreases along j, so the active envelope segment only moves left;
        # the walk lands exactly where a left-biased binary search would.
        h = n_hull - 1
        for j in range(m2):
            q = a * g2[j]
            while h > 0 and hull_thresh[h - 1] >= q:
                h -= 1
            base = la + lin2[j]
            f = (q * hull_slope[h] + hull_inter[h]) + base
            if f < best:
                best = f
                bi = i
                bj = j
                bk = hull_k[h]
    return best, bi, bj, bk

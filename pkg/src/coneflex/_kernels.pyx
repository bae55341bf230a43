# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot loops; see ``_kernels_py`` for the reference."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cosh, sinh, sqrt

cnp.import_array()

cdef double INVPHI = (sqrt(5.0) - 1.0) / 2.0


cdef inline double _cosh_pair(double guu, double guw, double gwu, double gww,
                              double s, double t) nogil:
    cdef double cs = cosh(s), ss = sinh(s), ct = cosh(t), st = sinh(t)
    return -(cs * ct * guu + cs * st * guw + ss * ct * gwu + ss * st * gww)


cdef double _inner(double guu, double guw, double gwu, double gww, double s,
                   double l2, double tol, double* t_out) nogil:
    cdef double a = 0.0, b = l2
    cdef double c = b - INVPHI * (b - a)
    cdef double d = a + INVPHI * (b - a)
    cdef double fc = _cosh_pair(guu, guw, gwu, gww, s, c)
    cdef double fd = _cosh_pair(guu, guw, gwu, gww, s, d)
    cdef double best, f, bt
    while b - a > tol:
        if fc < fd:
            b = d
            d = c
            fd = fc
            c = b - INVPHI * (b - a)
            fc = _cosh_pair(guu, guw, gwu, gww, s, c)
        else:
            a = c
            c = d
            fc = fd
            d = a + INVPHI * (b - a)
            fd = _cosh_pair(guu, guw, gwu, gww, s, d)
    bt = 0.5 * (a + b)
    best = _cosh_pair(guu, guw, gwu, gww, s, bt)
    f = _cosh_pair(guu, guw, gwu, gww, s, 0.0)
    if f < best:
        best = f
        bt = 0.0
    f = _cosh_pair(guu, guw, gwu, gww, s, l2)
    if f < best:
        best = f
        bt = l2
    t_out[0] = bt
    return best


cdef void _segment(double guu, double guw, double gwu, double gww, double l1,
                   double l2, double tol, double* out) nogil:
    cdef double a = 0.0, b = l1
    cdef double c = b - INVPHI * (b - a)
    cdef double d = a + INVPHI * (b - a)
    cdef double tc, td, t0, f, s, best, bt, bs
    cdef double fc = _inner(guu, guw, gwu, gww, c, l2, tol, &tc)
    cdef double fd = _inner(guu, guw, gwu, gww, d, l2, tol, &td)
    while b - a > tol:
        if fc < fd:
            b = d
            d = c
            fd = fc
            td = tc
            c = b - INVPHI * (b - a)
            fc = _inner(guu, guw, gwu, gww, c, l2, tol, &tc)
        else:
            a = c
            c = d
            fc = fd
            tc = td
            d = a + INVPHI * (b - a)
            fd = _inner(guu, guw, gwu, gww, d, l2, tol, &td)
    s = 0.5 * (a + b)
    best = _inner(guu, guw, gwu, gww, s, l2, tol, &bt)
    bs = s
    f = _inner(guu, guw, gwu, gww, 0.0, l2, tol, &t0)
    if f < best:
        best = f
        bs = 0.0
        bt = t0
    f = _inner(guu, guw, gwu, gww, l1, l2, tol, &t0)
    if f < best:
        best = f
        bs = l1
        bt = t0
    out[0] = best
    out[1] = bs
    out[2] = bt


def segment_cosh_min_gram(double guu, double guw, double gwu, double gww,
                          double l1, double l2, double tol=1e-10):
    cdef double out[3]
    _segment(guu, guw, gwu, gww, l1, l2, tol, out)
    return out[0], out[1], out[2]


def pairwise_segment_cosh_min(grams, lengths, pairs, double tol=1e-10):
    cdef double[:, ::1] g = np.ascontiguousarray(grams, dtype=np.float64)
    cdef double[::1] ln = np.ascontiguousarray(lengths, dtype=np.float64)
    cdef long[:, ::1] pr = np.ascontiguousarray(pairs, dtype=np.int64).reshape(-1, 2)
    cdef Py_ssize_t k, m = pr.shape[0]
    res = np.empty((m, 3))
    cdef double[:, ::1] r = res
    with nogil:
        for k in range(m):
            _segment(g[k, 0], g[k, 1], g[k, 2], g[k, 3], ln[pr[k, 0]], ln[pr[k, 1]],
                     tol, &r[k, 0])
    return res


def meridian_scan(words, long n):
    cdef long[:, ::1] w = np.ascontiguousarray(words, dtype=np.int64)
    cdef Py_ssize_t nw = w.shape[0], g = w.shape[1]
    cdef long total = n ** g
    cdef long idx, r, acc
    cdef Py_ssize_t i, k
    cdef bint ok
    xs = np.zeros(g, dtype=np.int64)
    cdef long[::1] x = xs
    hits = np.empty((total, g), dtype=np.int64)
    cdef long[:, ::1] h = hits
    cdef long count = 0
    with nogil:
        for idx in range(total):
            r = idx
            for k in range(g - 1, -1, -1):
                x[k] = r % n
                r = r // n
            ok = True
            for i in range(nw):
                acc = 0
                for k in range(g):
                    acc += w[i, k] * x[k]
                acc = acc % n
                if acc < 0:
                    acc += n
                if acc == 0:
                    ok = False
                    break
            if ok:
                for k in range(g):
                    h[count, k] = x[k]
                count += 1
    return hits[:count].copy()

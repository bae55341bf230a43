"""Pure-Python implementations of the hot loops (fallback backend)."""
import math

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _cosh_pair(guu, guw, gwu, gww, s, t):
    cs, ss = math.cosh(s), math.sinh(s)
    ct, st = math.cosh(t), math.sinh(t)
    return -(cs * ct * guu + cs * st * guw + ss * ct * gwu + ss * st * gww)


def _inner(guu, guw, gwu, gww, s, l2, tol):
    # golden-section in t for fixed s
    a, b = 0.0, l2
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = _cosh_pair(guu, guw, gwu, gww, s, c)
    fd = _cosh_pair(guu, guw, gwu, gww, s, d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = _cosh_pair(guu, guw, gwu, gww, s, c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = _cosh_pair(guu, guw, gwu, gww, s, d)
    best_t, best = 0.5 * (a + b), _cosh_pair(guu, guw, gwu, gww, s, 0.5 * (a + b))
    for t in (0.0, l2):
        f = _cosh_pair(guu, guw, gwu, gww, s, t)
        if f < best:
            best_t, best = t, f
    return best, best_t


def segment_cosh_min_gram(guu, guw, gwu, gww, l1, l2, tol=1e-10):
    """Minimise ``-<g1(s), g2(t)>`` over ``[0,l1] x [0,l2]``.

    ``g1(s) = cosh(s) u1 + sinh(s) w1`` and likewise for ``g2``; the four
    arguments ``g..`` are the Minkowski products of the frame vectors.
    Returns ``(cosh_min, s, t)``.
    """
    a, b = 0.0, l1
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, tc = _inner(guu, guw, gwu, gww, c, l2, tol)
    fd, td = _inner(guu, guw, gwu, gww, d, l2, tol)
    while b - a > tol:
        if fc < fd:
            b, d, fd, td = d, c, fc, tc
            c = b - _INVPHI * (b - a)
            fc, tc = _inner(guu, guw, gwu, gww, c, l2, tol)
        else:
            a, c, fc, tc = c, d, fd, td
            d = a + _INVPHI * (b - a)
            fd, td = _inner(guu, guw, gwu, gww, d, l2, tol)
    s = 0.5 * (a + b)
    best, bt = _inner(guu, guw, gwu, gww, s, l2, tol)
    best_s = s
    for s0 in (0.0, l1):
        f, t0 = _inner(guu, guw, gwu, gww, s0, l2, tol)
        if f < best:
            best, best_s, bt = f, s0, t0
    return best, best_s, bt


def pairwise_segment_cosh_min(grams, lengths, pairs, tol=1e-10):
    """Batched version: ``grams[k]`` holds the 4 products for ``pairs[k]``."""
    out = np.empty((len(pairs), 3))
    for k, (i, j) in enumerate(pairs):
        g = grams[k]
        out[k] = segment_cosh_min_gram(g[0], g[1], g[2], g[3], lengths[i], lengths[j], tol)
    return out


def meridian_scan(words, n):
    """Return all assignments in ``Z_n^g`` whose every word image is nonzero.

    ``words`` is an integer matrix (words x generators) of signed exponent
    sums.  Assignments are enumerated in lexicographic order.
    """
    words = np.asarray(words, dtype=np.int64)
    g = words.shape[1]
    hits = []
    for idx in range(n ** g):
        x = []
        r = idx
        for _ in range(g):
            x.append(r % n)
            r //= n
        x.reverse()
        ok = True
        for w in words:
            if sum(int(w[k]) * x[k] for k in range(g)) % n == 0:
                ok = False
                break
        if ok:
            hits.append(x)
    return np.array(hits, dtype=np.int64).reshape(-1, g)

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; results are identical."""

from libc.stdlib cimport malloc, free

DEF NEG_TOL = 1e-9


def bellman_ford(Py_ssize_t n, src, dst, w):
    cdef Py_ssize_t m = len(src)
    cdef Py_ssize_t k, it, u, v, last
    cdef double nd
    cdef double *dist = <double *> malloc(max(n, 1) * sizeof(double))
    cdef long *pred = <long *> malloc(max(n, 1) * sizeof(long))
    cdef long *cs = <long *> malloc(max(m, 1) * sizeof(long))
    cdef long *cd = <long *> malloc(max(m, 1) * sizeof(long))
    cdef double *cw = <double *> malloc(max(m, 1) * sizeof(double))
    try:
        for k in range(n):
            dist[k] = 0.0
            pred[k] = -1
        for k in range(m):
            cs[k] = src[k]
            cd[k] = dst[k]
            cw[k] = w[k]
        last = -1
        for it in range(n + 1):
            last = -1
            for k in range(m):
                u = cs[k]
                nd = dist[u] + cw[k]
                v = cd[k]
                if nd < dist[v] - NEG_TOL:
                    dist[v] = nd
                    pred[v] = u
                    last = v
            if last < 0:
                return [dist[k] for k in range(n)], None
        v = last
        for it in range(n):
            if pred[v] < 0:
                return None, list(range(n))
            v = pred[v]
        cycle = [v]
        u = pred[v]
        while u != v and u >= 0:
            cycle.append(u)
            u = pred[u]
        return None, cycle
    finally:
        free(dist)
        free(pred)
        free(cs)
        free(cd)
        free(cw)


def pair_sup(p1, p2, double total, double tol=1e-9):
    cdef Py_ssize_t n1 = len(p1), n2 = len(p2), i, j
    cdef double lo1, hi1, v1, lo2, hi2, v2, lo, hi, v, x
    cdef double best = 0.0, best_x = 0.0
    cdef bint found = False
    cdef double *b = <double *> malloc(max(3 * n2, 1) * sizeof(double))
    try:
        for j in range(n2):
            q = p2[j]
            b[3 * j] = q[0]
            b[3 * j + 1] = q[1]
            b[3 * j + 2] = q[2]
        for i in range(n1):
            q = p1[i]
            lo1 = q[0]
            hi1 = q[1]
            v1 = q[2]
            for j in range(n2):
                lo2 = b[3 * j]
                hi2 = b[3 * j + 1]
                v2 = b[3 * j + 2]
                lo = lo1 if lo1 > total - hi2 else total - hi2
                hi = hi1 if hi1 < total - lo2 else total - lo2
                if lo <= hi + tol:
                    v = v1 + v2
                    x = lo if lo < hi1 else hi1
                    if not found or v > best or (v == best and x < best_x):
                        best = v
                        best_x = x
                        found = True
    finally:
        free(b)
    if not found:
        return None, None
    return best, best_x


def prune_pieces(pieces, double tol=1e-9):
    cdef Py_ssize_t n = len(pieces), t, s, nk = 0
    cdef double lo, hi
    cdef bint inside
    order = sorted(range(n), key=lambda k: (-pieces[k][2], pieces[k][0], -pieces[k][1], k))
    cdef double *spans = <double *> malloc(max(2 * n, 1) * sizeof(double))
    kept = []
    try:
        for t in range(n):
            p = pieces[order[t]]
            lo = p[0]
            hi = p[1]
            inside = False
            for s in range(nk):
                if spans[2 * s] <= lo + tol and hi <= spans[2 * s + 1] + tol:
                    inside = True
                    break
            if inside:
                continue
            kept.append(p)
            spans[2 * nk] = lo
            spans[2 * nk + 1] = hi
            nk += 1
    finally:
        free(spans)
    kept.sort(key=lambda p: (p[0], p[1], -p[2]))
    return kept

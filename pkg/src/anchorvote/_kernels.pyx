# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Semantics mirror ``_kernels_py`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, lgamma

cnp.import_array()


cdef struct Ctx:
    int R
    int m
    const long long* scores
    const double* logp
    const unsigned char* zero
    double* logfact
    long long* tally
    double* acc
    double* comp
    long long leaves


cdef inline void _leaf(Ctx* c, const long long* t, double lw) noexcept nogil:
    cdef int a, ties = 0
    cdef long long best = t[0]
    cdef double share, y, s
    for a in range(1, c.m):
        if t[a] > best:
            best = t[a]
    for a in range(c.m):
        if t[a] == best:
            ties += 1
    share = exp(lw) / ties
    for a in range(c.m):
        if t[a] == best:
            # Kahan summation per alternative
            y = share - c.comp[a]
            s = c.acc[a] + y
            c.comp[a] = (s - c.acc[a]) - y
            c.acc[a] = s
    c.leaves += 1


cdef void _descend(Ctx* c, int k, int rem, double logw) noexcept nogil:
    cdef int a, hk, hi
    cdef const long long* cur = c.tally + k * c.m
    cdef long long* nxt = c.tally + (k + 1) * c.m
    cdef const long long* row = c.scores + k * c.m
    cdef double lw
    if k == c.R - 1:
        if rem > 0 and c.zero[k]:
            return
        lw = logw - c.logfact[rem]
        if rem > 0:
            lw += rem * c.logp[k]
        for a in range(c.m):
            nxt[a] = cur[a] + rem * row[a]
        _leaf(c, nxt, lw)
        return
    hi = 0 if c.zero[k] else rem
    for hk in range(hi + 1):
        lw = logw - c.logfact[hk]
        if hk > 0:
            lw += hk * c.logp[k]
        for a in range(c.m):
            nxt[a] = cur[a] + hk * row[a]
        _descend(c, k + 1, rem - hk, lw)


def positional_outcome(scores, p, int n):
    """Win probability of each alternative under a positional rule.

    Enumerates every histogram of ``n`` votes over the ``R`` reports, weights
    it by its multinomial probability under ``p`` and splits ties evenly.
    Returns ``(nu, leaves)`` where ``leaves`` counts visited histograms.
    """
    cdef const long long[:, ::1] S = np.ascontiguousarray(scores, dtype=np.int64)
    cdef const double[::1] P = np.ascontiguousarray(p, dtype=np.float64)
    cdef int R = S.shape[0], m = S.shape[1], r, i
    if P.shape[0] != R:
        raise ValueError("p must have one entry per report")
    cdef double[::1] logp = np.zeros(R)
    cdef unsigned char[::1] zero = np.zeros(R, dtype=np.uint8)
    for r in range(R):
        if P[r] <= 0.0:
            zero[r] = 1
        else:
            logp[r] = np.log(P[r])
    cdef double[::1] logfact = np.zeros(n + 1)
    for i in range(n + 1):
        logfact[i] = lgamma(i + 1.0)
    cdef long long[::1] tally = np.zeros((R + 1) * m, dtype=np.int64)
    cdef double[::1] acc = np.zeros(m)
    cdef double[::1] comp = np.zeros(m)
    cdef Ctx c
    c.R = R
    c.m = m
    c.scores = &S[0, 0]
    c.logp = &logp[0]
    c.zero = &zero[0]
    c.logfact = &logfact[0]
    c.tally = &tally[0]
    c.acc = &acc[0]
    c.comp = &comp[0]
    c.leaves = 0
    with nogil:
        _descend(&c, 0, n, logfact[n])
    return np.asarray(acc).copy(), c.leaves


def level_set_counts(points, reports, double tol):
    """Fractional nearest-report credit: per-report sums of w and w**2."""
    cdef const double[:, ::1] U = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, ::1] Rm = np.ascontiguousarray(reports, dtype=np.float64)
    cdef Py_ssize_t N = U.shape[0], i
    cdef int m = U.shape[1], R = Rm.shape[0], r, a, ties
    cdef double[::1] s1 = np.zeros(R)
    cdef double[::1] s2 = np.zeros(R)
    cdef double[::1] d = np.zeros(R)
    cdef double best, diff, acc, share
    with nogil:
        for i in range(N):
            best = 1e300
            for r in range(R):
                acc = 0.0
                for a in range(m):
                    diff = U[i, a] - Rm[r, a]
                    acc = acc + diff * diff
                d[r] = sqrt(acc)
                if d[r] < best:
                    best = d[r]
            ties = 0
            for r in range(R):
                if d[r] <= best + tol:
                    ties += 1
            share = 1.0 / ties
            for r in range(R):
                if d[r] <= best + tol:
                    s1[r] += share
                    s2[r] += share * share
    return np.asarray(s1).copy(), np.asarray(s2).copy()


def nearest_index(points, reports, double tol, uniforms):
    """Nearest report per point; ties resolved by ``uniforms`` (one per point)."""
    cdef const double[:, ::1] U = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, ::1] Rm = np.ascontiguousarray(reports, dtype=np.float64)
    cdef const double[::1] V = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t N = U.shape[0], i
    cdef int m = U.shape[1], R = Rm.shape[0], r, a, ties, pick, seen
    cdef cnp.int64_t[::1] out = np.zeros(N, dtype=np.int64)
    cdef double[::1] d = np.zeros(R)
    cdef double best, diff, acc
    with nogil:
        for i in range(N):
            best = 1e300
            for r in range(R):
                acc = 0.0
                for a in range(m):
                    diff = U[i, a] - Rm[r, a]
                    acc = acc + diff * diff
                d[r] = sqrt(acc)
                if d[r] < best:
                    best = d[r]
            ties = 0
            for r in range(R):
                if d[r] <= best + tol:
                    ties += 1
            pick = <int>(V[i] * ties)
            if pick >= ties:
                pick = ties - 1
            seen = 0
            for r in range(R):
                if d[r] <= best + tol:
                    if seen == pick:
                        out[i] = r
                        break
                    seen += 1
    return np.asarray(out).copy()

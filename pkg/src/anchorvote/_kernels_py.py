"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``."""
import math

import numpy as np

_CHUNK = 1 << 15


def positional_outcome(scores, p, n):
    S = np.ascontiguousarray(scores, dtype=np.int64)
    P = np.ascontiguousarray(p, dtype=np.float64)
    R, m = S.shape
    if P.shape[0] != R:
        raise ValueError("p must have one entry per report")
    rows = [tuple(int(x) for x in row) for row in S]
    zero = [x <= 0.0 for x in P]
    logp = [0.0 if z else math.log(x) for x, z in zip(P, zero)]
    logfact = [math.lgamma(i + 1.0) for i in range(n + 1)]
    acc = [0.0] * m
    comp = [0.0] * m
    leaves = 0

    def leaf(t, lw):
        nonlocal leaves
        best = max(t)
        tied = [a for a in range(m) if t[a] == best]
        share = math.exp(lw) / len(tied)
        for a in tied:
            y = share - comp[a]
            s = acc[a] + y
            comp[a] = (s - acc[a]) - y
            acc[a] = s
        leaves += 1

    def descend(k, rem, logw, cur):
        row = rows[k]
        if k == R - 1:
            if rem > 0 and zero[k]:
                return
            lw = logw - logfact[rem]
            if rem > 0:
                lw += rem * logp[k]
            leaf([c + rem * x for c, x in zip(cur, row)], lw)
            return
        hi = 0 if zero[k] else rem
        for hk in range(hi + 1):
            lw = logw - logfact[hk]
            if hk > 0:
                lw += hk * logp[k]
            descend(k + 1, rem - hk, lw, [c + hk * x for c, x in zip(cur, row)])

    descend(0, n, logfact[n], [0] * m)
    return np.array(acc), leaves


def _distances(U, Rm):
    diff = U[:, None, :] - Rm[None, :, :]
    return np.sqrt(np.einsum("nrm,nrm->nr", diff, diff))


def level_set_counts(points, reports, tol):
    U = np.ascontiguousarray(points, dtype=np.float64)
    Rm = np.ascontiguousarray(reports, dtype=np.float64)
    s1 = np.zeros(Rm.shape[0])
    s2 = np.zeros(Rm.shape[0])
    for start in range(0, U.shape[0], _CHUNK):
        d = _distances(U[start:start + _CHUNK], Rm)
        tied = d <= d.min(axis=1, keepdims=True) + tol
        share = tied / tied.sum(axis=1, keepdims=True)
        s1 += share.sum(axis=0)
        s2 += (share * share).sum(axis=0)
    return s1, s2


def nearest_index(points, reports, tol, uniforms):
    U = np.ascontiguousarray(points, dtype=np.float64)
    Rm = np.ascontiguousarray(reports, dtype=np.float64)
    V = np.ascontiguousarray(uniforms, dtype=np.float64)
    out = np.empty(U.shape[0], dtype=np.int64)
    for start in range(0, U.shape[0], _CHUNK):
        d = _distances(U[start:start + _CHUNK], Rm)
        tied = d <= d.min(axis=1, keepdims=True) + tol
        ties = tied.sum(axis=1)
        pick = np.minimum((V[start:start + _CHUNK] * ties).astype(np.int64), ties - 1)
        rank = np.cumsum(tied, axis=1) - 1
        hit = tied & (rank == pick[:, None])
        out[start:start + _CHUNK] = hit.argmax(axis=1)
    return out

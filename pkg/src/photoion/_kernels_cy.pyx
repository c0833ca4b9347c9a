# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the truncated Fock combinatorics.

Mirrors photoion._kernels_py bit for bit: graded-lex state enumeration and
per-mode creation triplet tables.  Basis indices are recovered through the
combinatorial rank of the graded-lex order (no hashing); child ranks are
updated incrementally so the whole table costs O(n_states * n_modes).
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def _binom_table(int n_modes, int n_max):
    # P[a, j] = C(a, j); only j <= n_max + 1 is ever queried because every
    # binomial in the rank formula has its small side bounded by the cap.
    cdef int amax = n_modes + n_max + 2
    cdef int jmax = n_max + 2
    P = np.zeros((amax + 1, jmax + 1), dtype=np.int64)
    cdef long long[:, :] Pv = P
    cdef int a, j
    for a in range(amax + 1):
        Pv[a, 0] = 1
        for j in range(1, min(a, jmax) + 1):
            Pv[a, j] = Pv[a - 1, j - 1] + (Pv[a - 1, j] if j <= a - 1 else 0)
    return P


def enumerate_states(int n_modes, int n_max):
    """All occupation vectors with total <= n_max, graded-lex ordered."""
    if n_modes < 1 or n_max < 0:
        raise ValueError("need n_modes >= 1 and n_max >= 0")
    P = _binom_table(n_modes, n_max)
    cdef long long count = P[n_modes + n_max, n_max]
    out = np.zeros((count, n_modes), dtype=np.int32)
    cdef int[:, :] outv = out
    cdef int[:] v = np.zeros(n_modes, dtype=np.int32)
    cdef long long row = 0
    cdef int t, i, j, rest
    cdef int M = n_modes
    for t in range(n_max + 1):
        for i in range(M):
            v[i] = 0
        v[M - 1] = t
        while True:
            for i in range(M):
                outv[row, i] = v[i]
            row += 1
            # next composition of t in ascending lex order
            rest = 0
            j = M - 2
            while j >= 0:
                rest += v[j + 1]
                if rest > 0:
                    break
                j -= 1
            if j < 0:
                break
            v[j] += 1
            for i in range(j + 1, M):
                v[i] = 0
            v[M - 1] = rest - 1
    return out


def creation_tables(states, int n_max):
    """Per-mode creation triplets (rows, cols, vals, mode_ptr).

    Same contract and ordering as the fallback: slice mode_ptr[m]:mode_ptr[m+1]
    holds mode m with parent (column) indices ascending.
    """
    states = np.ascontiguousarray(states, dtype=np.int32)
    cdef int[:, :] sv = states
    cdef long long n_states = states.shape[0]
    cdef int M = states.shape[1]
    P = _binom_table(M, n_max)
    cdef long long[:, :] Pv = P

    totals = np.asarray(states, dtype=np.int64).sum(axis=1)
    cdef long long n_parents = int(np.count_nonzero(totals < n_max))
    cdef long long nnz = n_parents * M

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    mode_ptr = np.empty(M + 1, dtype=np.int64)
    cdef long long[:] rowsv = rows
    cdef long long[:] colsv = cols
    cdef double[:] valsv = vals
    cdef long long[:] ptrv = mode_ptr

    cdef long long idx, rank_v, term_old, term_lt, term_eq, acc, doff
    cdef long long k
    cdef int t, i, s, q, n
    for i in range(M + 1):
        ptrv[i] = i * n_parents

    cdef long long p = 0  # parent counter
    for idx in range(n_states):
        t = 0
        for i in range(M):
            t += sv[idx, i]
        if t >= n_max:
            continue
        # rank of the parent: block offset C(t+M-1, t-1) plus within-block sum
        rank_v = Pv[t + M - 1, t - 1] if t >= 1 else 0
        s = t
        for i in range(M):
            q = M - 1 - i
            n = sv[idx, i]
            rank_v += Pv[s + q, s] - Pv[s - n + q, s - n]
            s -= n
        # child ranks for every mode in one sweep; acc collects the term
        # changes at positions left of the bumped mode (occupation unchanged,
        # remaining total shifted by one)
        doff = (Pv[t + M, t] if t + 1 >= 1 else 0) - (Pv[t + M - 1, t - 1] if t >= 1 else 0)
        acc = 0
        s = t
        for i in range(M):
            q = M - 1 - i
            n = sv[idx, i]
            term_old = Pv[s + q, s] - Pv[s - n + q, s - n]
            term_eq = Pv[s + 1 + q, s + 1] - Pv[s - n + q, s - n]
            k = ptrv[i] + p
            rowsv[k] = rank_v + doff + acc + (term_eq - term_old)
            colsv[k] = idx
            valsv[k] = sqrt(n + 1.0)
            term_lt = Pv[s + 1 + q, s + 1] - Pv[s + 1 - n + q, s + 1 - n]
            acc += term_lt - term_old
            s -= n
        p += 1
    return rows, cols, vals, mode_ptr

"""Pure-numpy kernels for the truncated Fock combinatorics.

Drop-in fallback for the compiled extension (see _kernels_cy.pyx); the
backend is chosen in photoion._backend.  Both implementations must produce
bit-identical arrays: the basis is ordered graded-lexicographically (total
occupation first, then lexicographically on the occupation tuple) and the
creation tables list parents in increasing basis index per mode.
"""
import numpy as np


def _void_keys(states, totals):
    """Sortable opaque keys realizing the graded-lex order.

    Big-endian byte concatenation of (total, n_1, ..., n_M) compares like the
    graded-lex tuple as long as all entries are non-negative.
    """
    n, m = states.shape
    buf = np.empty((n, m + 1), dtype=">i4")
    buf[:, 0] = totals
    buf[:, 1:] = states
    return np.ascontiguousarray(buf).view(f"V{4 * (m + 1)}").ravel()


def enumerate_states(n_modes, n_max):
    """All occupation vectors with total <= n_max, graded-lex ordered.

    Returns an int32 array of shape (count, n_modes) with
    count = C(n_modes + n_max, n_max).
    """
    if n_modes < 1 or n_max < 0:
        raise ValueError("need n_modes >= 1 and n_max >= 0")
    # Grow mode by mode, keeping every prefix with total <= n_max.
    states = np.zeros((1, 0), dtype=np.int32)
    totals = np.zeros(1, dtype=np.int32)
    for _ in range(n_modes):
        chunks = []
        tchunks = []
        for occ in range(n_max + 1):
            keep = totals + occ <= n_max
            sub = states[keep]
            col = np.full((sub.shape[0], 1), occ, dtype=np.int32)
            chunks.append(np.hstack([sub, col]))
            tchunks.append(totals[keep] + occ)
        states = np.vstack(chunks)
        totals = np.concatenate(tchunks)
    order = np.argsort(_void_keys(states, totals), kind="stable")
    return np.ascontiguousarray(states[order])


def creation_tables(states, n_max):
    """Sparse triplets of the per-mode creation operators.

    For each mode m the creation operator maps basis state s (column) to
    s + e_m (row) with amplitude sqrt(n_m + 1); states that would exceed the
    occupation cap are dropped.  Returns (rows, cols, vals, mode_ptr) where
    the slice mode_ptr[m]:mode_ptr[m+1] belongs to mode m and parents appear
    in increasing basis index.
    """
    states = np.asarray(states, dtype=np.int32)
    n_states, n_modes = states.shape
    totals = states.sum(axis=1).astype(np.int32)
    keys = _void_keys(states, totals)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]

    rows_parts, cols_parts, vals_parts = [], [], []
    mode_ptr = np.zeros(n_modes + 1, dtype=np.int64)
    parent_ok = totals < n_max
    parents_all = np.nonzero(parent_ok)[0].astype(np.int64)
    for m in range(n_modes):
        child = states[parent_ok].copy()
        child[:, m] += 1
        child_keys = _void_keys(child, totals[parent_ok] + 1)
        pos = np.searchsorted(sorted_keys, child_keys)
        child_idx = order[pos]
        rows_parts.append(child_idx.astype(np.int64))
        cols_parts.append(parents_all)
        vals_parts.append(np.sqrt(states[parent_ok, m] + 1.0))
        mode_ptr[m + 1] = mode_ptr[m] + parents_all.shape[0]
    rows = np.concatenate(rows_parts) if rows_parts else np.zeros(0, np.int64)
    cols = np.concatenate(cols_parts) if cols_parts else np.zeros(0, np.int64)
    vals = np.concatenate(vals_parts) if vals_parts else np.zeros(0, float)
    return rows, cols, vals, mode_ptr
